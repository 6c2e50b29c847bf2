//! Re-chosen boundary state: pin `|B_t(t)> = |A(t)>` at an anchor time, let
//! it develop as a bra-side state in a formal time, and decompose the
//! one-sided time derivative into the two partial derivatives this produces.
//!
//! Anchor-time motion obeys
//! `iħ ∂_t |B_t(t'')> = U⁻¹ (2 H_a) U |B_t(t'')>` with
//! `U = exp(-i H† (t - t'')/ħ)`; the two terms of the decomposition
//! reassemble the commutator-plus-fluctuation identity exactly.

use num_complex::Complex64 as C64;

use crate::dynamics::{evolve, split_hermitian, EvolveFlavor, EvolutionRecord};
use crate::error::{Error, Result};
use crate::expectations::{exp_aa, DecompositionReport};
use crate::linalg::{OperatorMatrix, StateVector};

/// Conditioning cap on the anchor-evolution operator `U`.
pub const U_COND_CAP: f64 = 1e8;

/// Boundary state re-chosen to coincide with the forward state at the anchor.
#[derive(Debug, Clone)]
pub struct RechosenB {
    pub anchor_time: f64,
    pub anchor_state: StateVector,
}

/// Picks the anchor from a stored trajectory; `state_at(anchor) == A(anchor)`
/// holds exactly (shared value).
pub fn rechoose_b(record: &EvolutionRecord, t: f64) -> Result<RechosenB> {
    let lo = *record.times.first().ok_or(Error::ZeroState)?;
    let hi = *record.times.last().unwrap();
    if t < lo - 1e-12 || t > hi + 1e-12 {
        return Err(Error::OutOfRange { t, lo, hi });
    }
    let idx = record
        .times
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1 - t)
                .abs()
                .partial_cmp(&(b.1 - t).abs())
                .expect("finite times")
        })
        .map(|(i, _)| i)
        .unwrap();
    if (record.times[idx] - t).abs() > 1e-9 {
        return Err(Error::OutOfRange { t, lo, hi });
    }
    Ok(RechosenB {
        anchor_time: t,
        anchor_state: record.a_states[idx].clone(),
    })
}

impl RechosenB {
    /// `|B_t(t')> = exp(-i H† (t' - t)/ħ) |A(t)>`.
    pub fn state_at(&self, t_prime: f64, h: &OperatorMatrix, hbar: f64) -> Result<StateVector> {
        evolve(
            &self.anchor_state,
            h,
            t_prime - self.anchor_time,
            EvolveFlavor::B,
            hbar,
        )
    }
}

/// Central-difference check of the anchor-time equation at formal time `t''`.
/// Returns `‖iħ ∂_t B_t(t'') - U⁻¹ 2H_a U B_t(t'')‖ / ‖B_t(t'')‖`, which is
/// O(dt²). Errors out when `U` is too ill-conditioned for the inversion to be
/// trustworthy.
pub fn bt_anchor_derivative_check(
    h: &OperatorMatrix,
    a_at_t: &StateVector,
    t: f64,
    t_dprime: f64,
    dt: f64,
    hbar: f64,
) -> Result<f64> {
    let u = h
        .adjoint()
        .scaled(C64::new(0.0, -(t - t_dprime) / hbar))
        .expm();
    let u_inv = h
        .adjoint()
        .scaled(C64::new(0.0, (t - t_dprime) / hbar))
        .expm();
    let cond = u.one_norm() * u_inv.one_norm();
    if cond > U_COND_CAP {
        return Err(Error::IllConditioned {
            what: format!("anchor evolution over |t - t''| = {}", (t - t_dprime).abs()),
            estimate: cond,
        });
    }

    let b_from_anchor = |anchor_t: f64| -> Result<StateVector> {
        // A(anchor_t) from A(t), then bra-side evolution to t''
        let a_anchor = evolve(a_at_t, h, anchor_t - t, EvolveFlavor::A, hbar)?;
        evolve(&a_anchor, h, t_dprime - anchor_t, EvolveFlavor::B, hbar)
    };

    let b_plus = b_from_anchor(t + dt)?;
    let b_minus = b_from_anchor(t - dt)?;
    let b_center = b_from_anchor(t)?;

    let fd = b_plus
        .sub(&b_minus)
        .scaled(C64::new(0.0, hbar / (2.0 * dt)));

    let (_, ha) = split_hermitian(h);
    let rhs_pre = ha.apply(&u.apply(&b_center)).scaled(C64::new(2.0, 0.0));
    // U x = 2 H_a U B, solved rather than inverted
    let rhs = u.solve(&rhs_pre)?;

    Ok(fd.sub(&rhs).norm() / b_center.norm())
}

/// Decomposition of `d/dt <O>^AA` through the re-chosen boundary: the
/// formal-time term `(i/ħ) <[H, O]>` evaluated at the anchor plus the
/// anchor-time term `(1/iħ)(-<[O, H_a]> + <{O - <O>, H_a}>)`, both one-sided
/// expectations at `t`. Their sum matches the central difference to O(dt²)
/// and reproduces the commutator-plus-fluctuation route identically.
pub fn decomposition_check(
    o: &OperatorMatrix,
    h: &OperatorMatrix,
    a_at_t: &StateVector,
    dt: f64,
    hbar: f64,
) -> Result<DecompositionReport> {
    let a_plus = evolve(a_at_t, h, dt, EvolveFlavor::A, hbar)?;
    let a_minus = evolve(a_at_t, h, -dt, EvolveFlavor::A, hbar)?;
    let total_fd = (exp_aa(o, &a_plus)? - exp_aa(o, &a_minus)?) / (2.0 * dt);

    let (_, ha) = split_hermitian(h);
    let i_over = C64::new(0.0, 1.0 / hbar);
    let inv_ih = C64::new(0.0, -1.0 / hbar);

    let term_t_prime = exp_aa(&h.commutator(o), a_at_t)? * i_over;
    let mean = exp_aa(o, a_at_t)?;
    let centered = o.sub(&OperatorMatrix::identity(o.dim()).scaled(mean));
    let term_t = (exp_aa(&centered.anticommutator(&ha), a_at_t)?
        - exp_aa(&o.commutator(&ha), a_at_t)?)
        * inv_ih;

    Ok(DecompositionReport {
        total_fd,
        commutator_term: term_t_prime,
        fluctuation_term: term_t,
        residual: total_fd - term_t_prime - term_t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::PolyFunction;
    use crate::dynamics::{build_hamiltonian, HamiltonianVariant, ModelConfig};
    use crate::expectations::ddt_decomposition_aa;
    use crate::fockspace::{build_space, coherent_state, FockSpace};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn setup() -> (FockSpace, ModelConfig, OperatorMatrix) {
        let space = build_space(100, 1.0, 1.0, 0.5).unwrap();
        let cfg = ModelConfig::default_model();
        let h = build_hamiltonian(&cfg, &space, HamiltonianVariant::HermitianArgs);
        (space, cfg, h)
    }

    #[test]
    fn anchor_identity() {
        let (space, cfg, h) = setup();
        let a0 = coherent_state(&space, c(1.0, 0.3)).unwrap();
        let rec = EvolutionRecord::evolve(&h, &a0, None, 0.0, 40, 0.01, cfg.hbar).unwrap();
        let rb = rechoose_b(&rec, 0.2).unwrap();
        // state_at(anchor) is exactly the trajectory state
        let got = rb.state_at(0.2, &h, cfg.hbar).unwrap();
        assert!(got.sub(&rb.anchor_state).norm() < 1e-14);
        // out-of-range anchors rejected
        assert!(rechoose_b(&rec, 2.0).is_err());
    }

    #[test]
    fn hermitian_h_makes_b_equal_a() {
        let space = build_space(80, 1.0, 1.0, 0.5).unwrap();
        let cfg = ModelConfig::new(
            c(1.0, 0.0),
            PolyFunction::from_terms(&[(2, c(0.5, 0.0))]),
            1.0,
        )
        .unwrap();
        let h = build_hamiltonian(&cfg, &space, HamiltonianVariant::HermitianArgs);
        let a0 = coherent_state(&space, c(0.9, 0.1)).unwrap();
        let rec = EvolutionRecord::evolve(&h, &a0, None, 0.0, 30, 0.01, 1.0).unwrap();
        let rb = rechoose_b(&rec, 0.1).unwrap();
        let b_later = rb.state_at(0.25, &h, 1.0).unwrap();
        // H = H†: the bra-side evolution coincides with the forward one
        let a_later = evolve(&rb.anchor_state, &h, 0.15, EvolveFlavor::A, 1.0).unwrap();
        assert!(b_later.sub(&a_later).norm() < 1e-12);
    }

    #[test]
    fn non_hermitian_b_differs_from_a() {
        let (space, cfg, h) = setup();
        let a0 = coherent_state(&space, c(1.0, 0.3)).unwrap();
        let rec = EvolutionRecord::evolve(&h, &a0, None, 0.0, 40, 0.01, cfg.hbar).unwrap();
        let rb = rechoose_b(&rec, 0.2).unwrap();
        let b = rb.state_at(0.3, &h, cfg.hbar).unwrap().normalized().unwrap();
        let a = evolve(&rb.anchor_state, &h, 0.1, EvolveFlavor::A, cfg.hbar)
            .unwrap()
            .normalized()
            .unwrap();
        assert!(b.sub(&a).norm() > 1e-4, "B-evolution should differ from A");
    }

    #[test]
    fn anchor_derivative_second_order() {
        let (space, cfg, h) = setup();
        let a0 = coherent_state(&space, c(1.0, 0.3)).unwrap();
        let a_t = evolve(&a0, &h, 0.3, EvolveFlavor::A, cfg.hbar).unwrap();
        let r1 = bt_anchor_derivative_check(&h, &a_t, 0.3, 0.1, 0.02, cfg.hbar).unwrap();
        let r2 = bt_anchor_derivative_check(&h, &a_t, 0.3, 0.1, 0.01, cfg.hbar).unwrap();
        let ratio = r1 / r2;
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio} ({r1} / {r2})");
    }

    #[test]
    fn anchor_derivative_hermitian_limit() {
        let space = build_space(80, 1.0, 1.0, 0.5).unwrap();
        let cfg = ModelConfig::new(
            c(1.0, 0.0),
            PolyFunction::from_terms(&[(2, c(0.5, 0.0))]),
            1.0,
        )
        .unwrap();
        let h = build_hamiltonian(&cfg, &space, HamiltonianVariant::HermitianArgs);
        let a0 = coherent_state(&space, c(0.8, 0.2)).unwrap();
        // H_a = 0 and the derivative is zero: residual is pure FD noise
        let r = bt_anchor_derivative_check(&h, &a0, 0.2, 0.05, 0.01, 1.0).unwrap();
        assert!(r < 1e-9, "hermitian residual {r}");
    }

    #[test]
    fn route_equivalence_with_direct_decomposition() {
        let (space, cfg, h) = setup();
        let a0 = coherent_state(&space, c(1.2, 0.5)).unwrap();
        let t = 0.25;
        let a_t = evolve(&a0, &h, t, EvolveFlavor::A, cfg.hbar).unwrap();

        let via_rechoose = decomposition_check(&space.q_op, &h, &a_t, 0.01, cfg.hbar).unwrap();
        let direct = ddt_decomposition_aa(&space.q_op, &h, &a0, t, 0.01, cfg.hbar).unwrap();

        let sum_a = via_rechoose.commutator_term + via_rechoose.fluctuation_term;
        let sum_b = direct.commutator_term + direct.fluctuation_term;
        assert!(
            (sum_a - sum_b).norm() < 1e-10,
            "routes disagree: {sum_a} vs {sum_b}"
        );
        assert!((via_rechoose.total_fd - direct.total_fd).norm() < 1e-9);
    }

    #[test]
    fn decomposition_trivial_cases() {
        let (space, cfg, h) = setup();
        let a0 = coherent_state(&space, c(1.0, 0.0)).unwrap();
        // O = 1: all terms vanish
        let ident = OperatorMatrix::identity(space.n_cut);
        let rep = decomposition_check(&ident, &h, &a0, 0.01, cfg.hbar).unwrap();
        assert!(rep.total_fd.norm() < 1e-10);
        assert!(rep.commutator_term.norm() < 1e-12);
        assert!(rep.fluctuation_term.norm() < 1e-12);

        // Hermitian H: anchor-time term vanishes, formal-time term is the
        // ordinary Heisenberg value
        let real_cfg = ModelConfig::new(
            c(1.0, 0.0),
            PolyFunction::from_terms(&[(2, c(0.5, 0.0))]),
            1.0,
        )
        .unwrap();
        let h_r = build_hamiltonian(&real_cfg, &space, HamiltonianVariant::HermitianArgs);
        let rep = decomposition_check(&space.q_op, &h_r, &a0, 0.01, 1.0).unwrap();
        assert!(rep.fluctuation_term.norm() < 1e-12);
        assert!((rep.total_fd - rep.commutator_term).norm() < 1e-6);
    }

    #[test]
    fn conditioning_guard_fires() {
        // a strongly growing anti-Hermitian part over a long interval
        let dim = 16;
        let mut h = OperatorMatrix::zeros(dim);
        for i in 0..dim {
            h.set(i, i, c(0.0, (i as f64) * 2.0));
        }
        let a = StateVector::basis_state(dim, 1);
        let err = bt_anchor_derivative_check(&h, &a, 2.0, 0.0, 0.01, 1.0);
        assert!(matches!(err, Err(Error::IllConditioned { .. })));
    }
}
