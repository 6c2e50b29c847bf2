//! Lattice path-integral machinery: slice kernels, the Gaussian momentum
//! integral over complex contours (the numerical witness of the saddle at
//! `p = m q̇`), composed amplitudes, ξ-states, and the branch-dependent
//! formal Lagrangian whose window average produces `p = m_eff q̇`.

use num_complex::Complex64 as C64;

use crate::contour::{step_sign, ContourPath, PathRule, QuadOptions, PATH_MARGIN};
use crate::dynamics::ModelConfig;
use crate::error::{Error, Result};
use crate::expectations::rk4_trajectory;

/// Short-time kernel `sqrt(m/(2πiħ dt)) exp[(i/ħ) dt (m q̇²/2 - V(q_cur))]`
/// with `q̇ = (q_next - q_cur)/dt`. Principal square root (Re > 0 for
/// `m_I >= 0`), continuous through the real-mass limit.
pub fn slice_kernel(q_next: C64, q_cur: C64, cfg: &ModelConfig, dt: f64) -> C64 {
    let qdot = (q_next - q_cur) / dt;
    let lagrangian = cfg.m * qdot * qdot * 0.5 - cfg.potential.eval(q_cur);
    let pref = (cfg.m
        / (C64::new(0.0, 2.0 * std::f64::consts::PI * cfg.hbar * dt)))
    .sqrt();
    pref * (C64::new(0.0, dt / cfg.hbar) * lagrangian).exp()
}

/// Straight permitted p-contour through the kinetic saddle `m q̇`, tilted to
/// damp the Gaussian, extending `n_sigmas` Gaussian widths each way.
pub fn saddle_p_path(cfg: &ModelConfig, qdot: C64, dt: f64, n_sigmas: f64) -> Result<ContourPath> {
    let theta_m = cfg.m.arg();
    let cap = std::f64::consts::FRAC_PI_4 - PATH_MARGIN - 1e-6;
    let tilt = (theta_m / 2.0 - std::f64::consts::FRAC_PI_4).clamp(-cap, cap);
    let sigma = (cfg.m.norm() * cfg.hbar / dt).sqrt();
    ContourPath::tilted_line(cfg.m * qdot, tilt, n_sigmas * sigma)
}

/// `(2πħ)⁻¹ ∫ exp[(i/ħ) dt (p q̇ - H(p, q_cur))] dp` along `p_path`.
/// Equals [`slice_kernel`] to quadrature accuracy; the integrand's
/// maximum-modulus point sits at the complex saddle `p = m q̇`.
pub fn gaussian_p_integral(
    q_cur: C64,
    qdot: C64,
    cfg: &ModelConfig,
    dt: f64,
    p_path: &ContourPath,
) -> Result<C64> {
    let sigma = (cfg.m.norm() * cfg.hbar / dt).sqrt();
    let opts = QuadOptions {
        max_seg_len: sigma / 6.0,
        ..QuadOptions::default()
    };
    let v_q = cfg.potential.eval(q_cur);
    let norm = 1.0 / (2.0 * std::f64::consts::PI * cfg.hbar);
    contour_integrate_local(
        |p| {
            let ham = p * p / (2.0 * cfg.m) + v_q;
            (C64::new(0.0, dt / cfg.hbar) * (p * qdot - ham)).exp() * norm
        },
        p_path,
        &opts,
    )
}

fn contour_integrate_local(
    f: impl Fn(C64) -> C64,
    path: &ContourPath,
    opts: &QuadOptions,
) -> Result<C64> {
    crate::contour::contour_integrate(f, path, opts)
}

/// Location of the maximum-modulus point of the p-integrand along the path
/// (grid argmax, no interpolation); the saddle witness.
pub fn p_integrand_argmax(
    q_cur: C64,
    qdot: C64,
    cfg: &ModelConfig,
    dt: f64,
    p_path: &ContourPath,
    n_samples: usize,
) -> C64 {
    let v_q = cfg.potential.eval(q_cur);
    let a = p_path.start();
    let b = p_path.end();
    let mut best = a;
    let mut best_mag = f64::NEG_INFINITY;
    for k in 0..=n_samples {
        let p = a + (b - a) * (k as f64 / n_samples as f64);
        let ham = p * p / (2.0 * cfg.m) + v_q;
        let mag = (C64::new(0.0, dt / cfg.hbar) * (p * qdot - ham)).exp().norm();
        if mag > best_mag {
            best_mag = mag;
            best = p;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Lattice composition
// ---------------------------------------------------------------------------

/// Time lattice over a fixed spatial contour.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub n_slices: usize,
    pub dt: f64,
    pub q_path: ContourPath,
    /// Quadrature sub-segment length on `q_path`.
    pub max_seg_len: f64,
}

impl Lattice {
    pub fn new(n_slices: usize, dt: f64, q_path: ContourPath, max_seg_len: f64) -> Result<Self> {
        if dt <= 0.0 || max_seg_len <= 0.0 {
            return Err(Error::InvalidParameter(
                "lattice needs dt > 0 and max_seg_len > 0".into(),
            ));
        }
        Ok(Self {
            n_slices,
            dt,
            q_path,
            max_seg_len,
        })
    }

    /// Straight permitted q-contour tilted by `atan(m_I/m_R)/2`, which damps
    /// the kinetic Gaussian for complex mass (and degenerates to the real
    /// axis in the real-mass limit).
    pub fn damped_q_path(cfg: &ModelConfig, extent: f64) -> Result<ContourPath> {
        let tilt = (cfg.m.im.atan2(cfg.m.re) / 2.0)
            .clamp(-(std::f64::consts::FRAC_PI_4 - PATH_MARGIN - 1e-6),
                std::f64::consts::FRAC_PI_4 - PATH_MARGIN - 1e-6);
        ContourPath::tilted_line(C64::new(0.0, 0.0), tilt, extent)
    }
}

/// Composes `n_slices` short-time kernels between the sampled wavefunctions:
///
/// ```text
///   ∫ dq_N .. dq_1  ψ_f_weight(q_N) K(q_N, q_{N-1}) ... K(q_2, q_1) ψ_i(q_1)
/// ```
///
/// `psi_f_weight` is the full bra-side weight (any coefficient conjugation is
/// the caller's choice). `n_slices = 0` degenerates to the plain overlap
/// `∫ ψ_f_weight ψ_i dq`.
pub fn lattice_amplitude(
    psi_i: impl Fn(C64) -> C64,
    psi_f_weight: impl Fn(C64) -> C64,
    cfg: &ModelConfig,
    lattice: &Lattice,
) -> Result<C64> {
    let rule = PathRule::build(&lattice.q_path, lattice.max_seg_len);
    let n = rule.nodes.len();

    // slice phase sanity: dt |V| / ħ must stay below one on the contour
    let v_max = rule
        .nodes
        .iter()
        .map(|&z| cfg.potential.eval(z).norm())
        .fold(0.0f64, f64::max);
    if lattice.dt * v_max / cfg.hbar >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "slice phase dt*|V|/hbar = {:.3} >= 1; shrink dt or the contour extent",
            lattice.dt * v_max / cfg.hbar
        )));
    }

    let mut phi: Vec<C64> = rule.nodes.iter().map(|&z| psi_i(z)).collect();
    decay_guard(&phi, &lattice.q_path, "initial wavefunction")?;

    if lattice.n_slices > 0 {
        // kernel matrix with quadrature weights folded in
        let mut kmat = vec![C64::new(0.0, 0.0); n * n];
        for (col, (&zk, &wk)) in rule.nodes.iter().zip(rule.weights.iter()).enumerate() {
            for (row, &zi) in rule.nodes.iter().enumerate() {
                kmat[row * n + col] = slice_kernel(zi, zk, cfg, lattice.dt) * wk;
            }
        }
        let mut next = vec![C64::new(0.0, 0.0); n];
        for _ in 0..lattice.n_slices {
            for (row, slot) in next.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                let base = row * n;
                for (col, p) in phi.iter().enumerate() {
                    acc += kmat[base + col] * p;
                }
                *slot = acc;
            }
            std::mem::swap(&mut phi, &mut next);
        }
        decay_guard(&phi, &lattice.q_path, "propagated wavefunction")?;
    }

    let mut acc = C64::new(0.0, 0.0);
    for ((&z, &w), p) in rule.nodes.iter().zip(rule.weights.iter()).zip(phi.iter()) {
        acc += psi_f_weight(z) * p * w;
    }
    Ok(acc)
}

fn decay_guard(values: &[C64], path: &ContourPath, what: &str) -> Result<()> {
    let max = values.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    let edge = values
        .first()
        .map(|z| z.norm())
        .unwrap_or(0.0)
        .max(values.last().map(|z| z.norm()).unwrap_or(0.0));
    if max > 0.0 && edge > 1e-9 * max {
        let _ = what;
        return Err(Error::DecayCheck {
            ratio: edge / max,
            suggested_extent: path.extent() * 1.5,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Gaussian wavepackets (analytic helpers for amplitude tests)
// ---------------------------------------------------------------------------

/// `(π w²)^(-1/4) exp[-(z - center)²/(2w²) + i momentum z / ħ]`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianPacket {
    pub center: C64,
    pub width: f64,
    pub momentum: C64,
    pub hbar: f64,
}

impl GaussianPacket {
    pub fn eval(&self, z: C64) -> C64 {
        let d = z - self.center;
        (std::f64::consts::PI * self.width * self.width).powf(-0.25)
            * (-d * d / (2.0 * self.width * self.width)
                + C64::new(0.0, 1.0) * self.momentum * z / self.hbar)
                .exp()
    }

    /// Coefficient-conjugated packet (variable kept analytic): center and
    /// momentum conjugate, the momentum also flips sign.
    pub fn conj_coeffs(&self) -> Self {
        Self {
            center: self.center.conj(),
            momentum: -self.momentum.conj(),
            ..*self
        }
    }
}

// ---------------------------------------------------------------------------
// ξ-states
// ---------------------------------------------------------------------------

/// `ψ_ξ(q) = exp[(i/ħ)(m/dt)(ξ q - q²/2)]`, the solution of
/// `(ħ/i) ∂_q ψ = m (ξ - q)/dt · ψ` normalized to `ψ(0) = 1`.
pub fn xi_state(q: C64, xi: C64, cfg: &ModelConfig, dt: f64) -> C64 {
    (C64::new(0.0, 1.0 / (cfg.hbar * dt)) * cfg.m * (xi * q - q * q * 0.5)).exp()
}

/// Result of propagating a ξ-state through one slice.
#[derive(Debug, Clone, Copy)]
pub struct XiPeak {
    pub peak_location: C64,
    pub peak_error: f64,
}

/// Propagates the ξ-state one slice along `lattice.q_path`, strips the known
/// Gaussian prefactor `exp[i m q'²/(2ħ dt)]`, and locates the maximum-modulus
/// point over a scan grid through `xi` (tilted by `scan_tilt`), refining the
/// argmax with quadratic interpolation.
pub fn xi_propagation_check(
    xi: C64,
    cfg: &ModelConfig,
    dt: f64,
    lattice: &Lattice,
    scan_halfwidth: f64,
    scan_points: usize,
    scan_tilt: f64,
) -> Result<XiPeak> {
    let rule = PathRule::build(&lattice.q_path, lattice.max_seg_len);
    let dir = C64::new(scan_tilt.cos(), scan_tilt.sin());
    let n = scan_points.max(8);
    let mut mags = Vec::with_capacity(n + 1);
    let mut locs = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let s = -scan_halfwidth + 2.0 * scan_halfwidth * (k as f64) / (n as f64);
        let q_next = xi + dir * s;
        let psi_out = rule.integrate(|q| slice_kernel(q_next, q, cfg, dt) * xi_state(q, xi, cfg, dt));
        let strip =
            (C64::new(0.0, -1.0) * cfg.m * q_next * q_next / (2.0 * cfg.hbar * dt)).exp();
        mags.push((psi_out * strip).norm());
        locs.push(q_next);
    }
    let (imax, _) = mags
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite magnitudes"))
        .unwrap();
    if imax < 2 || imax > n - 2 {
        return Err(Error::PeakNotInterior {
            halfwidth: scan_halfwidth,
        });
    }
    // quadratic interpolation of the discrete argmax
    let h = 2.0 * scan_halfwidth / n as f64;
    let (ym, y0, yp) = (mags[imax - 1], mags[imax], mags[imax + 1]);
    let denom = ym - 2.0 * y0 + yp;
    let delta = if denom.abs() > 0.0 {
        0.5 * (ym - yp) / denom
    } else {
        0.0
    };
    let peak_location = locs[imax] + dir * (delta * h);
    Ok(XiPeak {
        peak_location,
        peak_error: (peak_location - xi).norm(),
    })
}

/// Finite-difference residual of the ξ-state's defining relation,
/// `(ħ/i) ∂_q ψ / ψ - m (ξ - q)/dt`, with a central difference of step `h`.
pub fn xi_state_ode_residual(q: C64, xi: C64, cfg: &ModelConfig, dt: f64, h: f64) -> f64 {
    let dpsi = (xi_state(q + h, xi, cfg, dt) - xi_state(q - h, xi, cfg, dt)) / (2.0 * h);
    let psi = xi_state(q, xi, cfg, dt);
    let lhs = dpsi / psi * C64::new(0.0, -cfg.hbar);
    let rhs = cfg.m * (xi - q) / dt;
    (lhs - rhs).norm()
}

// ---------------------------------------------------------------------------
// Formal Lagrangian and the momentum window
// ---------------------------------------------------------------------------

/// Branch mass `m_R - i sign(t'-t) m_I`; equals `m` for `t' < t`, the
/// conjugate for `t' > t`, and `m_R` exactly at the midpoint (sign(0) = 0).
pub fn formal_mass(cfg: &ModelConfig, dt_rel: f64) -> C64 {
    C64::new(cfg.m.re, -step_sign(dt_rel) * cfg.m.im)
}

/// Branch potential `V_R(q) - i sign(t'-t) V_I(q)`.
pub fn formal_potential(cfg: &ModelConfig, q: C64, dt_rel: f64) -> C64 {
    let s = step_sign(dt_rel);
    cfg.v_r().eval(q) - C64::new(0.0, s) * cfg.v_i().eval(q)
}

/// `(L_formal, m_formal, V_formal)` at one point of one branch.
pub fn formal_lagrangian_eval(
    q_val: C64,
    qdot_val: C64,
    t_prime: f64,
    t: f64,
    cfg: &ModelConfig,
) -> (C64, C64, C64) {
    let m_f = formal_mass(cfg, t_prime - t);
    let v_f = formal_potential(cfg, q_val, t_prime - t);
    (m_f * qdot_val * qdot_val * 0.5 - v_f, m_f, v_f)
}

/// Step-weighted variant that keeps the original time orientation,
/// `Re_q L - i sign(t'-t) Im_q L` with the velocity unreflected. Retained for
/// comparison only: it maps just the one-sided half of the doubled path onto
/// the window, so the window-average identity is not built on it.
pub fn formal_lagrangian2_eval(
    q_val: C64,
    qdot_val: C64,
    t_prime: f64,
    t: f64,
    cfg: &ModelConfig,
) -> C64 {
    let s = step_sign(t_prime - t);
    let l = cfg.m * qdot_val * qdot_val * 0.5 - cfg.potential.eval(q_val);
    let l_conj = cfg.m.conj() * qdot_val * qdot_val * 0.5
        - cfg.potential.conj_coeffs().eval(q_val);
    let re = (l + l_conj) * 0.5;
    let im = (l - l_conj) / C64::new(0.0, 2.0);
    re - C64::new(0.0, s) * im
}

/// Two-branch trajectory around an anchor: the backward branch solves the
/// effective real flow `m_eff q̈ = -V_R'(q)`, the forward branch solves the
/// coefficient-conjugated flow `m̄ q̈ = -(V_R' - i V_I')(q)` seeded so that
/// `p_formal` is continuous at the anchor (`v⁺ = p(t)/m̄`, `p(t) = m v⁻(t)`).
#[derive(Debug, Clone)]
pub struct FormalTrajectory {
    pub anchor_time: f64,
    pub grid_step: f64,
    /// Ascending, length `2 n_side + 1`; anchor at index `n_side`.
    pub times: Vec<f64>,
    pub q_vals: Vec<C64>,
    /// Velocities on `[t - W, t]`, indices `0..=n_side` (left limit at t).
    pub v_left: Vec<C64>,
    /// Velocities on `[t, t + W]`, indices `0..=n_side` (right limit at t).
    pub v_right: Vec<C64>,
    /// Continuity value `p(t) = m v⁻(t)`.
    pub p_anchor: C64,
}

impl FormalTrajectory {
    pub fn reflected_classical(
        cfg: &ModelConfig,
        q_anchor: f64,
        v_anchor: f64,
        anchor_time: f64,
        half_width: f64,
        n_side: usize,
    ) -> Result<Self> {
        if n_side < 4 || half_width <= 0.0 {
            return Err(Error::InvalidParameter(
                "formal trajectory needs n_side >= 4 and a positive half-width".into(),
            ));
        }
        let h = half_width / n_side as f64;
        let m_eff = cfg.m_eff();
        let v_r_prime = cfg.v_r().derivative();
        let v_conj_prime = cfg.potential.conj_coeffs().derivative();

        // backward branch: integrate the effective flow in reverse
        let back = rk4_trajectory(
            C64::new(q_anchor, 0.0),
            C64::new(v_anchor, 0.0),
            |q| -v_r_prime.eval(q) / m_eff,
            -h,
            n_side,
        );
        // forward branch: conjugated flow, velocity matched for p-continuity
        let p_anchor = cfg.m * v_anchor;
        let v_plus = p_anchor / cfg.m.conj();
        let fwd = rk4_trajectory(
            C64::new(q_anchor, 0.0),
            v_plus,
            |q| -v_conj_prime.eval(q) / cfg.m.conj(),
            h,
            n_side,
        );

        let mut times = Vec::with_capacity(2 * n_side + 1);
        let mut q_vals = Vec::with_capacity(2 * n_side + 1);
        let mut v_left = Vec::with_capacity(n_side + 1);
        for k in (0..=n_side).rev() {
            times.push(anchor_time - k as f64 * h);
            q_vals.push(back[k].0);
            v_left.push(back[k].1);
        }
        let mut v_right = Vec::with_capacity(n_side + 1);
        for (k, (q, v)) in fwd.iter().enumerate() {
            if k > 0 {
                times.push(anchor_time + k as f64 * h);
                q_vals.push(*q);
            }
            v_right.push(*v);
        }
        Ok(Self {
            anchor_time,
            grid_step: h,
            times,
            q_vals,
            v_left,
            v_right,
            p_anchor,
        })
    }

    fn n_side(&self) -> usize {
        self.v_left.len() - 1
    }

    /// `p_formal` on the backward branch (left-grid index 0 at `t - W`).
    pub fn p_left(&self, k: usize, cfg: &ModelConfig) -> C64 {
        cfg.m * self.v_left[k]
    }

    /// `p_formal` on the forward branch (right-grid index 0 at `t`).
    pub fn p_right(&self, k: usize, cfg: &ModelConfig) -> C64 {
        cfg.m.conj() * self.v_right[k]
    }
}

/// Output of [`averaged_momentum_check`].
#[derive(Debug, Clone, Copy)]
pub struct WindowCheck {
    /// `(1/2W) ∫ p_formal / m_formal dt'` over the window.
    pub lhs: C64,
    /// `p(t) / m_eff`.
    pub rhs: C64,
    pub residual: f64,
    /// `|(1/2W) ∫ dt'/m_formal - 1/m_eff|`; exact up to roundoff.
    pub window_identity_residual: f64,
}

/// Simpson integration over `values` sampled at spacing `h` (even count of
/// intervals required).
fn simpson(values: &[C64], h: f64) -> C64 {
    let n = values.len() - 1;
    assert!(n >= 2 && n % 2 == 0, "simpson needs an even interval count");
    let mut acc = values[0] + values[n];
    for (k, v) in values.iter().enumerate().skip(1).take(n - 1) {
        acc += *v * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * (h / 3.0)
}

/// Window average of `p_formal/m_formal` around the anchor against
/// `p(t)/m_eff`. The residual is O(W); the side-wise average of
/// `1/m_formal` equals `1/m_eff` exactly.
pub fn averaged_momentum_check(
    traj: &FormalTrajectory,
    cfg: &ModelConfig,
    window: f64,
) -> Result<WindowCheck> {
    let h = traj.grid_step;
    let k_w = (window / h).round() as usize;
    if k_w < 2 || k_w > traj.n_side() {
        return Err(Error::OutOfRange {
            t: window,
            lo: 2.0 * h,
            hi: traj.n_side() as f64 * h,
        });
    }
    if ((k_w as f64) * h - window).abs() > 1e-9 * h {
        return Err(Error::InvalidParameter(
            "window must be a grid multiple".into(),
        ));
    }
    let k_w_even = if k_w % 2 == 0 { k_w } else { k_w - 1 };
    let w_eff = k_w_even as f64 * h;
    let n_side = traj.n_side();

    let m_left = cfg.m;
    let m_right = cfg.m.conj();

    // p_formal / m_formal per side, sign of the step function forced per side
    let left_vals: Vec<C64> = ((n_side - k_w_even)..=n_side)
        .map(|k| traj.p_left(k, cfg) / m_left)
        .collect();
    let right_vals: Vec<C64> = (0..=k_w_even)
        .map(|k| traj.p_right(k, cfg) / m_right)
        .collect();
    let lhs = (simpson(&left_vals, h) + simpson(&right_vals, h)) / (2.0 * w_eff);
    let rhs = traj.p_anchor / cfg.m_eff();

    // the exact window identity on 1/m_formal
    let inv_left: Vec<C64> = (0..=k_w_even).map(|_| 1.0 / m_left).collect();
    let inv_right: Vec<C64> = (0..=k_w_even).map(|_| 1.0 / m_right).collect();
    let avg_inv = (simpson(&inv_left, h) + simpson(&inv_right, h)) / (2.0 * w_eff);
    let window_identity_residual = (avg_inv - 1.0 / cfg.m_eff()).norm();

    Ok(WindowCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
        window_identity_residual,
    })
}
