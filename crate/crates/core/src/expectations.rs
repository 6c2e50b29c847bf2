//! The two expectation functionals and their exact time-development
//! identities.
//!
//! Two-sided: `<O>^BA = <B(t)|O|A(t)> / <B(t)|A(t)>` obeys
//! `d/dt <O>^BA = (i/ħ) <[H, O]>^BA` — one commutator, full H.
//!
//! One-sided: `<O>^AA = <A(t)|O|A(t)> / <A(t)|A(t)>` splits into a
//! commutator with the Hermitian part plus an anticommutator fluctuation
//! term,
//! `iħ d/dt <O>^AA = <[O, H_h]>^AA + <{O - <O>^AA, H_a}>^AA`,
//! an exact identity whose fluctuation piece is what fades in the
//! semiclassical regime, leaving `p = m_eff q̇` with
//! `m_eff = m_R + m_I²/m_R`.

use num_complex::Complex64 as C64;

use crate::contour::PolyFunction;
use crate::dynamics::{
    build_hamiltonian, evolve, poly_of_matrix, split_hermitian, EvolveFlavor, HamiltonianVariant,
    ModelConfig,
};
use crate::error::{Error, Result};
use crate::fockspace::FockSpace;
use crate::linalg::{OperatorMatrix, StateVector};
use crate::timeseries::TimeSeries;

/// Relative overlap tolerance below which the BA functional is rejected.
pub const BA_OVERLAP_TOL: f64 = 1e-10;

/// `<B|O|A> / <B|A>`; invariant under independent rescaling of both states.
pub fn exp_ba(o: &OperatorMatrix, b: &StateVector, a: &StateVector) -> Result<C64> {
    let denom = b.dot(a);
    let scale = b.norm() * a.norm();
    if denom.norm() <= BA_OVERLAP_TOL * scale {
        return Err(Error::NearOrthogonal {
            overlap: denom.norm(),
            tol: BA_OVERLAP_TOL * scale,
        });
    }
    Ok(b.dot(&o.apply(a)) / denom)
}

/// `<A|O|A> / <A|A>`; real for Hermitian `O`.
pub fn exp_aa(o: &OperatorMatrix, a: &StateVector) -> Result<C64> {
    let denom = a.dot(a);
    if denom.norm() <= 0.0 {
        return Err(Error::ZeroState);
    }
    Ok(a.dot(&o.apply(a)) / denom)
}

/// Terms of one time-development identity, all in units of `[O]/time`.
#[derive(Debug, Clone, Copy)]
pub struct DecompositionReport {
    /// Central-difference derivative of the functional.
    pub total_fd: C64,
    /// Commutator term (already divided by iħ).
    pub commutator_term: C64,
    /// Fluctuation (anticommutator) term; zero by definition for BA.
    pub fluctuation_term: C64,
    /// `total_fd - commutator_term - fluctuation_term`.
    pub residual: C64,
}

/// Two-sided identity at time `t`: central-difference `d/dt <O>^BA` against
/// `(i/ħ) <[H, O]>^BA`. `a0` is given at t = 0, `b_final` at `t_final`.
pub fn ddt_identity_ba(
    o: &OperatorMatrix,
    h: &OperatorMatrix,
    a0: &StateVector,
    b_final: &StateVector,
    t_final: f64,
    t: f64,
    dt: f64,
    hbar: f64,
) -> Result<DecompositionReport> {
    let a_at = |tt: f64| evolve(a0, h, tt, EvolveFlavor::A, hbar);
    let b_at = |tt: f64| evolve(b_final, h, tt - t_final, EvolveFlavor::B, hbar);

    let f_plus = exp_ba(o, &b_at(t + dt)?, &a_at(t + dt)?)?;
    let f_minus = exp_ba(o, &b_at(t - dt)?, &a_at(t - dt)?)?;
    let total_fd = (f_plus - f_minus) / (2.0 * dt);

    let comm = h.commutator(o); // [H, O]
    let commutator_term =
        exp_ba(&comm, &b_at(t)?, &a_at(t)?)? * C64::new(0.0, 1.0 / hbar);
    let fluctuation_term = C64::new(0.0, 0.0);
    Ok(DecompositionReport {
        total_fd,
        commutator_term,
        fluctuation_term,
        residual: total_fd - commutator_term - fluctuation_term,
    })
}

/// One-sided identity at time `t`: central-difference `d/dt <O>^AA` against
/// commutator-plus-fluctuation. The decomposition is exact; only the finite
/// difference carries O(dt²) error.
pub fn ddt_decomposition_aa(
    o: &OperatorMatrix,
    h: &OperatorMatrix,
    a0: &StateVector,
    t: f64,
    dt: f64,
    hbar: f64,
) -> Result<DecompositionReport> {
    let a_at = |tt: f64| evolve(a0, h, tt, EvolveFlavor::A, hbar);
    let f_plus = exp_aa(o, &a_at(t + dt)?)?;
    let f_minus = exp_aa(o, &a_at(t - dt)?)?;
    let total_fd = (f_plus - f_minus) / (2.0 * dt);

    let a_t = a_at(t)?;
    let (hh, ha) = split_hermitian(h);
    let inv_ih = C64::new(0.0, -1.0 / hbar); // 1/(iħ)
    let commutator_term = exp_aa(&o.commutator(&hh), &a_t)? * inv_ih;
    let fluctuation_term = fluctuation_term(o, &ha, &a_t, hbar)?;
    Ok(DecompositionReport {
        total_fd,
        commutator_term,
        fluctuation_term,
        residual: total_fd - commutator_term - fluctuation_term,
    })
}

/// `(1/iħ) <{O - <O>^AA, H_a}>^AA`.
pub fn fluctuation_term(
    o: &OperatorMatrix,
    h_a: &OperatorMatrix,
    a: &StateVector,
    hbar: f64,
) -> Result<C64> {
    let mean = exp_aa(o, a)?;
    let dim = o.dim();
    let centered = o.sub(&OperatorMatrix::identity(dim).scaled(mean));
    let anti = centered.anticommutator(h_a);
    Ok(exp_aa(&anti, a)? * C64::new(0.0, -1.0 / hbar))
}

/// Effective classical objects of the one-sided theory.
#[derive(Debug, Clone)]
pub struct LagrangianCoeffs {
    /// Coefficient of `q̇²/2`.
    pub kinetic: f64,
    pub potential: PolyFunction,
}

#[derive(Debug, Clone)]
pub struct EffectiveObjects {
    pub m_eff: f64,
    pub v_r: PolyFunction,
    pub v_i: PolyFunction,
    pub l_r: LagrangianCoeffs,
    pub l_i: LagrangianCoeffs,
    pub l_eff: LagrangianCoeffs,
    /// `p̂²/(2 m_eff) + V_R(q̂)`: the coefficient-real part of H.
    pub h_r_matrix: OperatorMatrix,
    /// Window average of the branch-dependent Hamiltonian; equals `h_r_matrix`.
    pub h_eff_matrix: OperatorMatrix,
    /// Hermitian part of the Hermitian-args H.
    pub h_h_matrix: OperatorMatrix,
}

/// Populates every effective object; the matrix identity
/// `H_eff = H_h` holds exactly for the Hermitian-args construction because
/// `Re(1/m) = 1/m_eff` and the Hermitian part of `V(q̂)` is `V_R(q̂)`.
pub fn effective_quantities(cfg: &ModelConfig, space: &FockSpace) -> Result<EffectiveObjects> {
    if cfg.m.re == 0.0 {
        return Err(Error::SingularMass);
    }
    let m_eff = cfg.m_eff();
    let v_r = cfg.v_r();
    let v_i = cfg.v_i();
    let p2 = space.p_op.mul(&space.p_op);
    let h_r = p2
        .scaled(C64::new(1.0 / (2.0 * m_eff), 0.0))
        .add(&poly_of_matrix(&v_r, &space.q_op));
    let h = build_hamiltonian(cfg, space, HamiltonianVariant::HermitianArgs);
    let (h_h, _) = split_hermitian(&h);
    Ok(EffectiveObjects {
        m_eff,
        v_r: v_r.clone(),
        v_i: v_i.clone(),
        l_r: LagrangianCoeffs {
            kinetic: cfg.m.re,
            potential: v_r.clone(),
        },
        l_i: LagrangianCoeffs {
            kinetic: cfg.m.im,
            potential: v_i,
        },
        l_eff: LagrangianCoeffs {
            kinetic: m_eff,
            potential: v_r,
        },
        h_eff_matrix: h_r.clone(),
        h_r_matrix: h_r,
        h_h_matrix: h_h,
    })
}

// ---------------------------------------------------------------------------
// Classical integrators
// ---------------------------------------------------------------------------

/// RK4 for `q̈ = accel(q)` over complex phase space, fixed step.
pub fn rk4_trajectory(
    q0: C64,
    v0: C64,
    accel: impl Fn(C64) -> C64,
    dt: f64,
    n_steps: usize,
) -> Vec<(C64, C64)> {
    let mut out = Vec::with_capacity(n_steps + 1);
    let (mut q, mut v) = (q0, v0);
    out.push((q, v));
    for _ in 0..n_steps {
        let k1q = v;
        let k1v = accel(q);
        let k2q = v + k1v * (dt / 2.0);
        let k2v = accel(q + k1q * (dt / 2.0));
        let k3q = v + k2v * (dt / 2.0);
        let k3v = accel(q + k2q * (dt / 2.0));
        let k4q = v + k3v * dt;
        let k4v = accel(q + k3q * dt);
        q += (k1q + k2q * 2.0 + k3q * 2.0 + k4q) * (dt / 6.0);
        v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (dt / 6.0);
        out.push((q, v));
    }
    out
}

/// Comparison mode for [`trajectory_compare`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareMode {
    /// Two-sided functional against the full complex classical flow
    /// `m q̈ = -V'(q)`.
    Fi,
    /// One-sided functional against the effective real flow
    /// `m_eff q̈ = -V_R'(q)`.
    Fni,
}

/// Classical substeps per quantum step (the classical error must stay
/// negligible against the quantum comparison).
const CLASSICAL_SUBSTEPS: usize = 10;

/// Runs the quantum trajectory and its classical counterpart, emitting
/// per-time expectation values, identity terms, Ehrenfest residuals, and the
/// classical deviation.
#[allow(clippy::too_many_arguments)]
pub fn trajectory_compare(
    cfg: &ModelConfig,
    space: &FockSpace,
    a0: &StateVector,
    b_final: Option<&StateVector>,
    horizon: f64,
    dt: f64,
    mode: CompareMode,
) -> Result<TimeSeries> {
    let hbar = cfg.hbar;
    let n_steps = (horizon / dt).round() as usize;
    let h = build_hamiltonian(cfg, space, HamiltonianVariant::HermitianArgs);
    let (hh, ha) = split_hermitian(&h);
    let _ = &hh;
    let u_fwd = h.scaled(C64::new(0.0, -dt / hbar)).expm();

    let v_r = cfg.v_r();
    let v_r_prime = v_r.derivative();
    let v_prime = cfg.potential.derivative();
    let m_eff = cfg.m_eff();

    // quantum sweep
    let mut a = a0.normalized()?;
    let mut b_traj: Vec<StateVector> = Vec::new();
    if mode == CompareMode::Fi {
        let bf = b_final.ok_or_else(|| {
            Error::InvalidParameter("fi mode requires a final boundary state".into())
        })?;
        let u_back = h.adjoint().scaled(C64::new(0.0, dt / hbar)).expm();
        let mut cur = bf.clone();
        let mut rev = vec![cur.clone()];
        for _ in 0..n_steps {
            cur = u_back.apply(&cur);
            cur = cur.normalized()?; // scale-invariant functional; keep finite
            rev.push(cur.clone());
        }
        rev.reverse();
        b_traj = rev;
    }

    let mut qs: Vec<C64> = Vec::with_capacity(n_steps + 1);
    let mut ps: Vec<C64> = Vec::with_capacity(n_steps + 1);
    let mut comms: Vec<C64> = Vec::with_capacity(n_steps + 1);
    let mut flucts: Vec<C64> = Vec::with_capacity(n_steps + 1);
    let mut vprimes: Vec<C64> = Vec::with_capacity(n_steps + 1);

    for k in 0..=n_steps {
        let (q_val, p_val, comm, fluct, vp) = match mode {
            CompareMode::Fni => {
                let q_val = exp_aa(&space.q_op, &a)?;
                let p_val = exp_aa(&space.p_op, &a)?;
                let comm =
                    exp_aa(&space.q_op.commutator(&hh), &a)? * C64::new(0.0, -1.0 / hbar);
                let fluct = fluctuation_term(&space.q_op, &ha, &a, hbar)?;
                let vp = exp_aa(&poly_of_matrix(&v_r_prime, &space.q_op), &a)?;
                (q_val, p_val, comm, fluct, vp)
            }
            CompareMode::Fi => {
                let b = &b_traj[k];
                let q_val = exp_ba(&space.q_op, b, &a)?;
                let p_val = exp_ba(&space.p_op, b, &a)?;
                let comm =
                    exp_ba(&h.commutator(&space.q_op), b, &a)? * C64::new(0.0, 1.0 / hbar);
                let vp = exp_ba(&poly_of_matrix(&v_prime, &space.q_op), b, &a)?;
                (q_val, p_val, comm, C64::new(0.0, 0.0), vp)
            }
        };
        qs.push(q_val);
        ps.push(p_val);
        comms.push(comm);
        flucts.push(fluct);
        vprimes.push(vp);
        if k < n_steps {
            a = u_fwd.apply(&a).normalized()?;
        }
    }

    // classical counterpart with matched initial conditions
    let sub_dt = dt / CLASSICAL_SUBSTEPS as f64;
    let classical: Vec<(C64, C64)> = match mode {
        CompareMode::Fni => {
            let q0 = C64::new(qs[0].re, 0.0);
            let v0 = C64::new(ps[0].re / m_eff, 0.0);
            rk4_trajectory(
                q0,
                v0,
                |q| -v_r_prime.eval(q) / m_eff,
                sub_dt,
                n_steps * CLASSICAL_SUBSTEPS,
            )
        }
        CompareMode::Fi => rk4_trajectory(
            qs[0],
            ps[0] / cfg.m,
            |q| -v_prime.eval(q) / cfg.m,
            sub_dt,
            n_steps * CLASSICAL_SUBSTEPS,
        ),
    };
    let q_cl: Vec<C64> = (0..=n_steps)
        .map(|k| classical[k * CLASSICAL_SUBSTEPS].0)
        .collect();
    let cl_scale = q_cl.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1e-12);

    let mass_for_ehrenfest = match mode {
        CompareMode::Fni => C64::new(m_eff, 0.0),
        CompareMode::Fi => cfg.m,
    };

    let mut ts = TimeSeries::new(&[
        "t",
        "q_re",
        "q_im",
        "p_re",
        "p_im",
        "comm_re",
        "comm_im",
        "fluct_re",
        "fluct_im",
        "fluct_ratio",
        "ehrenfest_resid",
        "q_cl_re",
        "q_cl_im",
        "class_dev",
    ]);
    for k in 0..=n_steps {
        let t = k as f64 * dt;
        let ehrenfest = if k > 0 && k < n_steps {
            let acc = (qs[k + 1] - qs[k] * 2.0 + qs[k - 1]) / (dt * dt);
            (mass_for_ehrenfest * acc + vprimes[k]).norm()
        } else {
            0.0
        };
        let ratio = flucts[k].norm() / comms[k].norm().max(1e-300);
        let dev = (qs[k] - q_cl[k]).norm() / cl_scale;
        ts.push_row(&[
            t,
            qs[k].re,
            qs[k].im,
            ps[k].re,
            ps[k].im,
            comms[k].re,
            comms[k].im,
            flucts[k].re,
            flucts[k].im,
            ratio,
            ehrenfest,
            q_cl[k].re,
            q_cl[k].im,
            dev,
        ])?;
    }
    ts.set_meta("mode", if mode == CompareMode::Fni { "fni" } else { "fi" });
    ts.set_meta("m_eff", format!("{m_eff:.17e}"));
    Ok(ts)
}
