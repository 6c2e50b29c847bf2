//! Truncated bosonic basis, the non-Hermitian coordinate and momentum
//! operators, and the coherent-state basis kets at complex eigenvalues.
//!
//! The ladder operators set the scale: `a = sqrt(1/(2ħε)) (q̂ + iε p̂)`, so
//! `q̂ = sqrt(ħε/2)(a + a†)` and `p̂ = -i sqrt(ħ/(2ε))(a - a†)`. The
//! non-Hermitian pair
//!
//! ```text
//!   q̂_new = (q̂ - iε p̂) / sqrt(1 - εε'),
//!   p̂_new = (p̂ + iε' q̂) / sqrt(1 - εε'),
//! ```
//!
//! keeps `[q̂_new, p̂_new] = iħ` while the Hermitian conjugates acquire
//! eigenkets `|q>_new`, `|p>_new` at complex eigenvalues: `q̂_new ∝ a†`, so
//! `q̂_new† |q>_new = q |q>_new` holds on Gaussian-weighted coherent states,
//! and the momentum kets are squeezed states of a second oscillator built on
//! `a'† = sqrt(ε'/2ħ)(q̂ - i p̂/ε')`.
//!
//! Pairings use the modified bra `_m<λ| = <λ*|`: conjugate the structural
//! constants, keep the label analytic.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{OperatorMatrix, StateVector};

/// Rows/columns excluded from algebraic checks at the truncation corner.
pub const K_GUARD: usize = 5;

/// Truncated oscillator basis with its operator matrices.
#[derive(Debug, Clone)]
pub struct FockSpace {
    pub n_cut: usize,
    pub hbar: f64,
    pub eps: f64,
    pub eps_prime: f64,
    pub a: OperatorMatrix,
    pub a_dag: OperatorMatrix,
    pub q_op: OperatorMatrix,
    pub p_op: OperatorMatrix,
}

/// Which basis family a ket belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    QKet,
    PKet,
}

/// Builds the truncated space. Requires `n_cut >= 8` (otherwise there is no
/// meaningful interior block) and `ε ε' < 1` (the 1/sqrt(1-εε') prefactors).
pub fn build_space(n_cut: usize, hbar: f64, eps: f64, eps_prime: f64) -> Result<FockSpace> {
    if n_cut < 8 {
        return Err(Error::InvalidParameter(format!(
            "n_cut = {n_cut} too small; need n_cut >= 8"
        )));
    }
    if hbar <= 0.0 || eps <= 0.0 || eps_prime <= 0.0 {
        return Err(Error::InvalidParameter(
            "hbar, eps, eps_prime must all be positive".into(),
        ));
    }
    if eps * eps_prime >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "eps*eps_prime = {} >= 1: new-operator prefactor undefined",
            eps * eps_prime
        )));
    }
    let mut a = OperatorMatrix::zeros(n_cut);
    for n in 1..n_cut {
        a.set(n - 1, n, C64::new((n as f64).sqrt(), 0.0));
    }
    let a_dag = a.adjoint();
    let cq = (hbar * eps / 2.0).sqrt();
    let cp = (hbar / (2.0 * eps)).sqrt();
    let q_op = a.add(&a_dag).scaled(C64::new(cq, 0.0));
    let p_op = a.sub(&a_dag).scaled(C64::new(0.0, -cp));
    Ok(FockSpace {
        n_cut,
        hbar,
        eps,
        eps_prime,
        a,
        a_dag,
        q_op,
        p_op,
    })
}

impl FockSpace {
    fn u(&self) -> f64 {
        1.0 - self.eps * self.eps_prime
    }

    /// Oscillator length `sqrt(ħ ε)`.
    pub fn length_scale(&self) -> f64 {
        (self.hbar * self.eps).sqrt()
    }

    /// Smearing width of the q-ket orthogonality delta, `ε₁ = ħε/(1-εε')`.
    pub fn eps1(&self) -> f64 {
        self.hbar * self.eps / self.u()
    }

    /// Smearing width of the p-ket orthogonality delta, `ε₁' = ħε'/(1-εε')`.
    pub fn eps1_prime(&self) -> f64 {
        self.hbar * self.eps_prime / self.u()
    }

    /// Coherent displacement entering the q-ket at label `q`.
    pub fn q_amplitude(&self, q: C64) -> C64 {
        q * (self.u() / (2.0 * self.hbar * self.eps)).sqrt()
    }

    /// Coherent displacement entering the p-ket at label `p` (in the primary
    /// ladder basis, after normal-ordering the second oscillator).
    pub fn p_amplitude(&self, p: C64) -> C64 {
        let ee = self.eps * self.eps_prime;
        C64::new(0.0, 1.0) * p * (2.0 * self.u() * self.eps / self.hbar).sqrt() / (1.0 + ee)
    }
}

/// The non-Hermitian pair `(q̂_new, p̂_new)`.
pub fn new_operators(space: &FockSpace) -> (OperatorMatrix, OperatorMatrix) {
    let s = 1.0 / space.u().sqrt();
    let q_new = space
        .q_op
        .add(&space.p_op.scaled(C64::new(0.0, -space.eps)))
        .scaled(C64::new(s, 0.0));
    let p_new = space
        .p_op
        .add(&space.q_op.scaled(C64::new(0.0, space.eps_prime)))
        .scaled(C64::new(s, 0.0));
    (q_new, p_new)
}

fn trust_check(space: &FockSpace, amplitude: f64) -> Result<()> {
    // six-sigma Poisson tail: |λ|² + 6|λ| <= n_cut
    let required = (amplitude * amplitude + 6.0 * amplitude).ceil() as usize;
    if required > space.n_cut {
        return Err(Error::TrustRegion {
            amplitude,
            required_n_cut: required,
            n_cut: space.n_cut,
        });
    }
    Ok(())
}

fn coherent_coeffs(lambda: C64, n_cut: usize) -> Vec<C64> {
    let mut c = vec![C64::new(0.0, 0.0); n_cut];
    c[0] = C64::new(1.0, 0.0);
    for n in 1..n_cut {
        c[n] = c[n - 1] * lambda / (n as f64).sqrt();
    }
    c
}

/// Fock coefficients of `exp(ν a† + (τ/2) a†²)|0>` via the stable normalized
/// recursion `ψ_{n+1} = (ν ψ_n + τ sqrt(n) ψ_{n-1}) / sqrt(n+1)`.
fn displaced_squeezed_coeffs(nu: C64, tau: f64, n_cut: usize) -> Vec<C64> {
    let mut c = vec![C64::new(0.0, 0.0); n_cut];
    c[0] = C64::new(1.0, 0.0);
    if n_cut > 1 {
        c[1] = nu;
    }
    for n in 1..(n_cut - 1) {
        c[n + 1] = (nu * c[n] + c[n - 1] * (tau * (n as f64).sqrt()))
            / ((n as f64 + 1.0).sqrt());
    }
    c
}

/// Truncated Fock expansion of `|q>_new` or `|p>_new`, Gaussian prefactors
/// included (the kets are delta-normalized, not unit-normalized).
pub fn basis_ket(space: &FockSpace, kind: BasisKind, value: C64) -> Result<StateVector> {
    let u = space.u();
    let hbar = space.hbar;
    match kind {
        BasisKind::QKet => {
            let lambda = space.q_amplitude(value);
            trust_check(space, lambda.norm())?;
            let pref = (u / (4.0 * std::f64::consts::PI * hbar * space.eps)).powf(0.25);
            let gauss = (-value * value * (u / (4.0 * hbar * space.eps))).exp();
            let scalar = gauss * pref;
            let coeffs = coherent_coeffs(lambda, space.n_cut)
                .into_iter()
                .map(|c| c * scalar)
                .collect::<Vec<_>>();
            StateVector::from_slice(&coeffs).normalized_err()
        }
        BasisKind::PKet => {
            let ee = space.eps * space.eps_prime;
            let tau = (1.0 - ee) / (1.0 + ee);
            let nu = space.p_amplitude(value);
            trust_check(space, nu.norm())?;
            let pref = (u / (4.0 * std::f64::consts::PI * hbar * space.eps_prime)).powf(0.25)
                * (4.0 * ee / ((1.0 + ee) * (1.0 + ee))).powf(0.25);
            let gauss =
                (-value * value * (u * space.eps / (2.0 * hbar * (1.0 + ee)))).exp();
            let scalar = gauss * pref;
            let coeffs = displaced_squeezed_coeffs(nu, tau, space.n_cut)
                .into_iter()
                .map(|c| c * scalar)
                .collect::<Vec<_>>();
            StateVector::from_slice(&coeffs).normalized_err()
        }
    }
}

trait FiniteCheck {
    fn normalized_err(self) -> Result<StateVector>;
}
impl FiniteCheck for StateVector {
    fn normalized_err(self) -> Result<StateVector> {
        if self.array().iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(self)
        } else {
            Err(Error::InvalidParameter(
                "basis ket overflowed; label too large for this space".into(),
            ))
        }
    }
}

/// Coefficient vector of the modified bra `_m<kind value| = <kind value*|`:
/// conjugate the structural constants, keep the label analytic.
pub fn mod_bra(space: &FockSpace, kind: BasisKind, value: C64) -> Result<StateVector> {
    Ok(basis_ket(space, kind, value.conj())?.conj())
}

/// Overlap `_m<bra|ket>` by the truncated coefficient sum.
pub fn overlap(
    space: &FockSpace,
    bra_kind: BasisKind,
    bra_value: C64,
    ket_kind: BasisKind,
    ket_value: C64,
) -> Result<C64> {
    let bra = mod_bra(space, bra_kind, bra_value)?;
    let ket = basis_ket(space, ket_kind, ket_value)?;
    Ok(bra.tdot(&ket))
}

/// A word in the symbols `(q̂_new, q̂_new†, p̂_new, p̂_new†)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpSymbol {
    QNew,
    QNewDag,
    PNew,
    PNewDag,
}

/// One monomial of an operator polynomial: coefficient times a product of
/// symbols, applied left to right.
pub type OpWord = (C64, Vec<OpSymbol>);

fn word_matrix(
    word: &[OpSymbol],
    q_new: &OperatorMatrix,
    p_new: &OperatorMatrix,
    hermitize: bool,
    space: &FockSpace,
) -> OperatorMatrix {
    let mut m = OperatorMatrix::identity(space.n_cut);
    for sym in word {
        let factor = if hermitize {
            match sym {
                OpSymbol::QNew | OpSymbol::QNewDag => space.q_op.clone(),
                OpSymbol::PNew | OpSymbol::PNewDag => space.p_op.clone(),
            }
        } else {
            match sym {
                OpSymbol::QNew => q_new.clone(),
                OpSymbol::QNewDag => q_new.adjoint(),
                OpSymbol::PNew => p_new.clone(),
                OpSymbol::PNewDag => p_new.adjoint(),
            }
        };
        m = m.mul(&factor);
    }
    m
}

/// Matrix elements of a polynomial in the new operators between real-label
/// q-kets, compared against the same polynomial with every symbol replaced by
/// the Hermitian `q̂` or `p̂`. Returns the maximum deviation over the grid;
/// it vanishes as ε, ε' → 0 at fixed truncation margin.
pub fn theorem1_residual(space: &FockSpace, poly: &[OpWord], grid: &[f64]) -> Result<f64> {
    let (q_new, p_new) = new_operators(space);
    let op_new = poly.iter().fold(OperatorMatrix::zeros(space.n_cut), |acc, (c, w)| {
        acc.add(&word_matrix(w, &q_new, &p_new, false, space).scaled(*c))
    });
    let op_h = poly.iter().fold(OperatorMatrix::zeros(space.n_cut), |acc, (c, w)| {
        acc.add(&word_matrix(w, &q_new, &p_new, true, space).scaled(*c))
    });
    let mut worst = 0.0f64;
    for &qp in grid {
        let bra = mod_bra(space, BasisKind::QKet, C64::new(qp, 0.0))?;
        for &qpp in grid {
            let ket = basis_ket(space, BasisKind::QKet, C64::new(qpp, 0.0))?;
            let a = bra.tdot(&op_new.apply(&ket));
            let b = bra.tdot(&op_h.apply(&ket));
            worst = worst.max((a - b).norm());
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Position representation (ordinary complete basis)
// ---------------------------------------------------------------------------

/// Ordinary harmonic-oscillator eigenfunctions `<x|n>` for the space's
/// length scale, by the stable Hermite-function recursion.
pub fn hermite_functions(space: &FockSpace, x: f64, n_max: usize) -> Vec<f64> {
    let ell = space.length_scale();
    let xi = x / ell;
    let mut h = vec![0.0; n_max];
    if n_max == 0 {
        return h;
    }
    h[0] = (std::f64::consts::PI * ell * ell).powf(-0.25) * (-xi * xi / 2.0).exp();
    if n_max > 1 {
        h[1] = xi * std::f64::consts::SQRT_2 * h[0];
    }
    for n in 1..(n_max - 1) {
        h[n + 1] = (2.0 / (n as f64 + 1.0)).sqrt() * xi * h[n]
            - (n as f64 / (n as f64 + 1.0)).sqrt() * h[n - 1];
    }
    h
}

/// `<x|ψ>` for a Fock-space state.
pub fn position_wavefunction(space: &FockSpace, state: &StateVector, x: f64) -> C64 {
    let h = hermite_functions(space, x, space.n_cut);
    state
        .array()
        .iter()
        .zip(h.iter())
        .map(|(c, hn)| c * *hn)
        .sum()
}

/// Projects a position wavefunction onto the Fock basis by quadrature over
/// `[-extent, extent]` with `n_points` uniform Simpson nodes (odd count).
pub fn project_wavefunction(
    space: &FockSpace,
    psi: impl Fn(f64) -> C64,
    extent: f64,
    n_points: usize,
) -> Result<StateVector> {
    if n_points < 3 || n_points % 2 == 0 {
        return Err(Error::InvalidParameter(
            "projection needs an odd number of points >= 3".into(),
        ));
    }
    let h = 2.0 * extent / (n_points - 1) as f64;
    let mut acc = vec![C64::new(0.0, 0.0); space.n_cut];
    for k in 0..n_points {
        let x = -extent + k as f64 * h;
        let w = if k == 0 || k == n_points - 1 {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        } * h
            / 3.0;
        let fx = psi(x);
        let herm = hermite_functions(space, x, space.n_cut);
        for (n, a) in acc.iter_mut().enumerate() {
            *a += fx * herm[n] * w;
        }
    }
    StateVector::new(ndarray::Array1::from_vec(acc))
}

/// Coherent state `exp(-|α|²/2) Σ αⁿ/sqrt(n!) |n>` (unit norm).
pub fn coherent_state(space: &FockSpace, alpha: C64) -> Result<StateVector> {
    trust_check(space, alpha.norm())?;
    let scalar = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    let coeffs = coherent_coeffs(alpha, space.n_cut)
        .into_iter()
        .map(|c| c * scalar)
        .collect::<Vec<_>>();
    Ok(StateVector::from_slice(&coeffs))
}

/// Phase-space center of a coherent state: `(⟨q̂⟩, ⟨p̂⟩)`.
pub fn coherent_center(space: &FockSpace, alpha: C64) -> (f64, f64) {
    let ell = space.length_scale();
    (
        ell * std::f64::consts::SQRT_2 * alpha.re,
        space.hbar / ell * std::f64::consts::SQRT_2 * alpha.im,
    )
}

/// Coherent amplitude that centers the state at phase-space point `(q, p)`.
pub fn coherent_amplitude_for(space: &FockSpace, q: f64, p: f64) -> C64 {
    let ell = space.length_scale();
    C64::new(q / ell, p * ell / space.hbar) / std::f64::consts::SQRT_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::smeared_delta;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn two_level_ladder() {
        let s = build_space(8, 1.0, 1.0, 0.1).unwrap();
        // q = sqrt(1/2) (a + a†): check the 2x2 corner
        let v = (0.5f64).sqrt();
        assert!((s.q_op.at(0, 1) - c(v, 0.0)).norm() < 1e-15);
        assert!((s.q_op.at(1, 0) - c(v, 0.0)).norm() < 1e-15);
        assert!(s.q_op.at(0, 0).norm() < 1e-15);
    }

    #[test]
    fn number_operator_exact() {
        let s = build_space(40, 1.0, 0.7, 0.2).unwrap();
        let n_op = s.a_dag.mul(&s.a);
        for n in 0..40 {
            assert!((n_op.at(n, n) - c(n as f64, 0.0)).norm() < 1e-13);
            if n > 0 {
                assert!(n_op.at(n, n - 1).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn canonical_commutator_interior() {
        let s = build_space(60, 1.0, 1.0, 0.5).unwrap();
        let comm = s.q_op.commutator(&s.p_op);
        let dev = comm
            .sub(&OperatorMatrix::identity(60).scaled(c(0.0, 1.0)))
            .interior_max_abs(K_GUARD);
        assert!(dev < 1e-12, "interior commutator deviation {dev}");
        // the defect is confined to the corner
        let full = comm
            .sub(&OperatorMatrix::identity(60).scaled(c(0.0, 1.0)))
            .max_abs();
        assert!(full > 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_space(4, 1.0, 1.0, 0.1).is_err());
        assert!(build_space(8, 1.0, 0.5, 2.1).is_err());
        assert!(build_space(8, -1.0, 0.5, 0.1).is_err());
    }

    #[test]
    fn new_operators_commutator_and_limit() {
        let s = build_space(60, 1.0, 0.3, 0.2).unwrap();
        let (qn, pn) = new_operators(&s);
        let dev = qn
            .commutator(&pn)
            .sub(&OperatorMatrix::identity(60).scaled(c(0.0, s.hbar)))
            .interior_max_abs(K_GUARD);
        assert!(dev < 1e-10, "new commutator deviation {dev}");

        // tiny ε, ε': the new operators degenerate to the Hermitian pair
        let s0 = build_space(20, 1.0, 1e-9, 1e-9).unwrap();
        let (qn0, pn0) = new_operators(&s0);
        assert!(qn0.sub(&s0.q_op).max_abs() < 1e-8);
        assert!(pn0.sub(&s0.p_op).max_abs() < 1e-8);
    }

    #[test]
    fn new_q_antihermitian_part() {
        let s = build_space(40, 1.0, 0.2, 0.1).unwrap();
        let (qn, _) = new_operators(&s);
        let anti = qn.antihermitian_part();
        // anti-Hermitian part is -iε p̂ / sqrt(u)
        let want = s
            .p_op
            .scaled(c(0.0, -s.eps / s.u().sqrt()));
        assert!(anti.sub(&want).max_abs() < 1e-13);
        assert!(anti.interior_max_abs(K_GUARD) > 0.0);
    }

    #[test]
    fn q_ket_at_zero_is_ground_state() {
        let s = build_space(30, 1.0, 0.5, 0.1).unwrap();
        let ket = basis_ket(&s, BasisKind::QKet, c(0.0, 0.0)).unwrap();
        for n in 1..30 {
            assert!(ket.at(n).norm() < 1e-15);
        }
        assert!(ket.at(0).norm() > 0.0);
    }

    #[test]
    fn q_ket_eigenrelation_real_label() {
        let s = build_space(200, 1.0, 0.05, 0.02).unwrap();
        let (qn, _) = new_operators(&s);
        let q = c(1.0, 0.0);
        let ket = basis_ket(&s, BasisKind::QKet, q).unwrap();
        let resid = qn.adjoint().apply(&ket).sub(&ket.scaled(q)).norm() / ket.norm();
        assert!(resid < 1e-8, "eigenrelation residual {resid}");
    }

    #[test]
    fn q_ket_eigenrelation_complex_label() {
        let s = build_space(200, 1.0, 0.05, 0.02).unwrap();
        let (qn, _) = new_operators(&s);
        let q = c(0.5, 0.2);
        let ket = basis_ket(&s, BasisKind::QKet, q).unwrap();
        let resid = qn.adjoint().apply(&ket).sub(&ket.scaled(q)).norm() / ket.norm();
        assert!(resid < 1e-8, "eigenrelation residual {resid}");
    }

    #[test]
    fn p_ket_eigenrelation() {
        let s = build_space(240, 1.0, 0.3, 0.3).unwrap();
        let (_, pn) = new_operators(&s);
        let p = c(0.4, 0.0);
        let ket = basis_ket(&s, BasisKind::PKet, p).unwrap();
        let resid = pn.adjoint().apply(&ket).sub(&ket.scaled(p)).norm() / ket.norm();
        assert!(resid < 1e-7, "p eigenrelation residual {resid}");
    }

    #[test]
    fn eigenrelation_residual_decreases_with_n_cut() {
        let q = c(0.8, 0.1);
        let mut prev = f64::INFINITY;
        for n_cut in [60, 120, 240] {
            let s = build_space(n_cut, 1.0, 0.05, 0.02).unwrap();
            let (qn, _) = new_operators(&s);
            let ket = basis_ket(&s, BasisKind::QKet, q).unwrap();
            let resid = qn.adjoint().apply(&ket).sub(&ket.scaled(q)).norm() / ket.norm();
            assert!(resid <= prev * 1.01, "residual not decreasing: {resid} vs {prev}");
            prev = resid;
        }
    }

    #[test]
    fn trust_region_reports_required_n_cut() {
        let s = build_space(30, 1.0, 0.01, 0.01).unwrap();
        let err = basis_ket(&s, BasisKind::QKet, c(2.0, 0.0)).unwrap_err();
        match err {
            Error::TrustRegion { required_n_cut, .. } => assert!(required_n_cut > 30),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn qq_overlap_matches_smeared_delta() {
        let s = build_space(200, 1.0, 0.05, 0.02).unwrap();
        // zero-argument: δ_c^{ε₁}(0) = 1/sqrt(4π ε₁)
        let q0 = c(0.7, 0.0);
        let v = overlap(&s, BasisKind::QKet, q0, BasisKind::QKet, q0).unwrap();
        let want = 1.0 / (4.0 * std::f64::consts::PI * s.eps1()).sqrt();
        assert!((v - c(want, 0.0)).norm() < 1e-10 * want);

        // separated labels against the contour-module oracle
        let v = overlap(&s, BasisKind::QKet, c(1.2, 0.0), BasisKind::QKet, c(1.0, 0.0)).unwrap();
        let want = smeared_delta(c(0.2, 0.0), c(s.eps1(), 0.0));
        assert!((v - want).norm() < 1e-6, "got {v}, want {want}");
    }

    #[test]
    fn pp_overlap_matches_smeared_delta() {
        let s = build_space(240, 1.0, 0.3, 0.3).unwrap();
        let v = overlap(&s, BasisKind::PKet, c(0.5, 0.0), BasisKind::PKet, c(0.3, 0.0)).unwrap();
        let want = smeared_delta(c(0.2, 0.0), c(s.eps1_prime(), 0.0));
        assert!(
            (v - want).norm() < 1e-6 * want.norm().max(1.0),
            "got {v}, want {want}"
        );
    }

    #[test]
    fn qp_overlap_fourier_kernel() {
        // closed-form oracle for the finite-regulator kernel:
        //   (2πħ)^{-1/2} sqrt(u/(1+εε')) exp[(u/(1+εε'))(ipq - ε'q²/2 - εp²/2)/ħ]
        let s = build_space(200, 1.0, 0.01, 0.01).unwrap();
        let (q, p) = (c(1.0, 0.0), c(0.5, 0.0));
        let got = overlap(&s, BasisKind::QKet, q, BasisKind::PKet, p).unwrap();
        let u = 1.0 - s.eps * s.eps_prime;
        let r = u / (1.0 + s.eps * s.eps_prime);
        let oracle = (2.0 * std::f64::consts::PI * s.hbar).powf(-0.5)
            * r.sqrt()
            * ((C64::new(0.0, 1.0) * p * q
                - q * q * (s.eps_prime / 2.0)
                - p * p * (s.eps / 2.0))
                * (r / s.hbar))
                .exp();
        assert!(
            (got - oracle).norm() < 1e-9,
            "truncated sum {got} vs closed form {oracle}"
        );
        // and the ideal kernel within the regulator distortion
        let ideal = (2.0 * std::f64::consts::PI * s.hbar).powf(-0.5)
            * (C64::new(0.0, 1.0) * p * q / s.hbar).exp();
        assert!((got - ideal).norm() < 5e-3, "got {got}, ideal {ideal}");
    }

    #[test]
    fn modified_bra_is_analytic() {
        // Cauchy-Riemann finite-difference check: the overlap as a function of
        // the ket label is holomorphic (d/dx = -i d/dy).
        let s = build_space(160, 1.0, 0.1, 0.05).unwrap();
        let bra_q = c(0.4, 0.1);
        let ket_q = c(0.3, -0.05);
        let h = 1e-5;
        let f = |z: C64| overlap(&s, BasisKind::QKet, bra_q, BasisKind::QKet, z).unwrap();
        let dx = (f(ket_q + c(h, 0.0)) - f(ket_q - c(h, 0.0))) / (2.0 * h);
        let dy = (f(ket_q + c(0.0, h)) - f(ket_q - c(0.0, h))) / (2.0 * h);
        let cr = (dx - dy * c(0.0, -1.0)).norm();
        assert!(cr < 1e-6 * dx.norm().max(1.0), "Cauchy-Riemann defect {cr}");
    }

    #[test]
    fn theorem1_identity_word() {
        let s = build_space(80, 1.0, 1e-3, 1e-3).unwrap();
        let poly: Vec<OpWord> = vec![(c(1.0, 0.0), vec![])];
        let r = theorem1_residual(&s, &poly, &[-0.5, 0.0, 0.5]).unwrap();
        assert!(r < 1e-14, "identity residual {r}");
    }

    #[test]
    fn coherent_state_center() {
        let s = build_space(80, 1.0, 0.5, 0.1).unwrap();
        let alpha = c(1.5, 0.7);
        let st = coherent_state(&s, alpha).unwrap();
        let (q, p) = coherent_center(&s, alpha);
        let q_meas = st.dot(&s.q_op.apply(&st)) / st.dot(&st);
        let p_meas = st.dot(&s.p_op.apply(&st)) / st.dot(&st);
        assert!((q_meas - c(q, 0.0)).norm() < 1e-10);
        assert!((p_meas - c(p, 0.0)).norm() < 1e-10);
        let back = coherent_amplitude_for(&s, q, p);
        assert!((back - alpha).norm() < 1e-12);
    }

    #[test]
    fn position_projection_roundtrip() {
        let s = build_space(60, 1.0, 1.0, 0.1).unwrap();
        let st = coherent_state(&s, c(1.0, 0.4)).unwrap();
        let proj =
            project_wavefunction(&s, |x| position_wavefunction(&s, &st, x), 12.0, 1201).unwrap();
        assert!(proj.sub(&st).norm() < 1e-8);
    }
}
