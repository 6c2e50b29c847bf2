//! Complex-plane quadrature and the smeared delta calculus.
//!
//! A distribution g acts on analytic test functions through
//! `G[f] = ∫_C f(q) g(q) dq` where the contour C runs from -∞ to +∞ with its
//! tangent within π/4 of horizontal; inside that cone the Gaussian-smeared
//! delta `δ_c^ε(q) = sqrt(1/(4πε)) exp(-q²/4ε)` converges and the contour can
//! be deformed freely.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Slope margin (radians) kept away from the π/4 cone boundary.
pub const PATH_MARGIN: f64 = 0.05;

/// Sign function with the symmetric-window convention `sign(0) = 0`.
pub fn step_sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Gaussian-smeared delta function for complex argument and complex width.
pub fn smeared_delta(z: C64, eps: C64) -> C64 {
    let pref = (C64::new(1.0, 0.0) / (4.0 * std::f64::consts::PI * eps)).sqrt();
    pref * (-z * z / (4.0 * eps)).exp()
}

/// Convergence indicator: `L(q) = Re(q)² - Im(q)²` must stay positive for the
/// smeared delta (real width) to converge at large |q|.
pub fn delta_domain_indicator(q: C64) -> f64 {
    q.re * q.re - q.im * q.im
}

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

/// Piecewise-linear integration path, monotone in the real direction, with
/// every segment slope within `π/4 - PATH_MARGIN` of horizontal.
#[derive(Debug, Clone)]
pub struct ContourPath {
    nodes: Vec<C64>,
}

impl ContourPath {
    pub fn new(nodes: Vec<C64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidParameter(
                "path needs at least two nodes".into(),
            ));
        }
        let max_slope = (std::f64::consts::FRAC_PI_4 - PATH_MARGIN).tan();
        for w in nodes.windows(2) {
            let dz = w[1] - w[0];
            if dz.re <= 0.0 {
                return Err(Error::InvalidParameter(
                    "path nodes must be strictly increasing in the real part".into(),
                ));
            }
            if (dz.im / dz.re).abs() > max_slope {
                return Err(Error::InvalidParameter(format!(
                    "path segment slope {:.3} exceeds the permitted |slope| <= {:.3}",
                    (dz.im / dz.re).abs(),
                    max_slope
                )));
            }
        }
        Ok(Self { nodes })
    }

    /// Straight segment of the real axis, [-extent, extent].
    pub fn real_line(extent: f64) -> Result<Self> {
        Self::new(vec![C64::new(-extent, 0.0), C64::new(extent, 0.0)])
    }

    /// Straight line through `center` at angle `tilt`, half-length `half_len`
    /// measured along the line.
    pub fn tilted_line(center: C64, tilt: f64, half_len: f64) -> Result<Self> {
        let dir = C64::new(tilt.cos(), tilt.sin());
        Self::new(vec![center - dir * half_len, center + dir * half_len])
    }

    /// Real-axis path that detours through the complex point `via`, rejoining
    /// the axis at `Re(via) ± shoulder`.
    pub fn real_line_via(extent: f64, via: C64, shoulder: f64) -> Result<Self> {
        if via.im == 0.0 {
            return Self::new(vec![
                C64::new(-extent, 0.0),
                via,
                C64::new(extent, 0.0),
            ]);
        }
        Self::new(vec![
            C64::new(-extent, 0.0),
            C64::new(via.re - shoulder, 0.0),
            via,
            C64::new(via.re + shoulder, 0.0),
            C64::new(extent, 0.0),
        ])
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn start(&self) -> C64 {
        self.nodes[0]
    }

    pub fn end(&self) -> C64 {
        *self.nodes.last().unwrap()
    }

    /// Half-extent in the real direction.
    pub fn extent(&self) -> f64 {
        self.start().re.abs().max(self.end().re.abs())
    }

    /// Split every segment into pieces no longer than `max_len`, keeping the
    /// piecewise-linear geometry. Returns (sub-segment start, end) pairs.
    pub fn refined(&self, max_len: f64) -> Vec<(C64, C64)> {
        let mut out = Vec::new();
        for w in self.nodes.windows(2) {
            let len = (w[1] - w[0]).norm();
            let pieces = (len / max_len).ceil().max(1.0) as usize;
            for k in 0..pieces {
                let a = w[0] + (w[1] - w[0]) * (k as f64 / pieces as f64);
                let b = w[0] + (w[1] - w[0]) * ((k + 1) as f64 / pieces as f64);
                out.push((a, b));
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// 16-point Gauss-Legendre nodes (positive half) and weights on [-1, 1].
const GL16_X: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_8,
    0.755_404_408_355_003_0,
    0.865_631_202_387_831_8,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL16_W: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_5,
    0.149_595_988_816_576_7,
    0.124_628_971_255_533_9,
    0.095_158_511_682_492_8,
    0.062_253_523_938_647_9,
    0.027_152_459_411_754_1,
];

/// Quadrature controls for [`contour_integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    /// Maximum sub-segment length before applying 16-point Gauss-Legendre.
    pub max_seg_len: f64,
    /// Endpoint decay requirement: |f(end)| < decay_tol * max |f| on the path.
    pub decay_tol: f64,
    /// Skip the endpoint decay check (for integrands that are regularized by
    /// the finite window on purpose, e.g. oscillatory sifting kernels).
    pub check_decay: bool,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            max_seg_len: 0.05,
            decay_tol: 1e-12,
            check_decay: true,
        }
    }
}

impl QuadOptions {
    /// Resolution matched to a smeared delta of width parameter `eps`:
    /// sub-segments no longer than `0.1 sqrt(|eps|)`, capped for sanity.
    pub fn for_delta_width(eps: C64) -> Self {
        Self {
            max_seg_len: (0.1 * eps.norm().sqrt()).min(0.25),
            ..Self::default()
        }
    }
}

/// Sampled quadrature rule on a path: nodes and complex weights (segment
/// Jacobians folded in). Reused when many integrands share one path.
#[derive(Debug, Clone)]
pub struct PathRule {
    pub nodes: Vec<C64>,
    pub weights: Vec<C64>,
}

impl PathRule {
    pub fn build(path: &ContourPath, max_seg_len: f64) -> Self {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (a, b) in path.refined(max_seg_len) {
            let mid = (a + b) * 0.5;
            let half = (b - a) * 0.5;
            for k in 0..8 {
                for sgn in [-1.0, 1.0] {
                    let z = mid + half * (sgn * GL16_X[k]);
                    nodes.push(z);
                    weights.push(half * GL16_W[k]);
                }
            }
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, mut f: impl FnMut(C64) -> C64) -> C64 {
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .map(|(&z, &w)| f(z) * w)
            .sum()
    }
}

/// Integrate `f` along `path` with composite Gauss-Legendre quadrature.
///
/// Fails if the integrand has not decayed at the endpoints (suggesting the
/// extent is too small), unless the check is disabled in `opts`.
pub fn contour_integrate(
    f: impl Fn(C64) -> C64,
    path: &ContourPath,
    opts: &QuadOptions,
) -> Result<C64> {
    let rule = PathRule::build(path, opts.max_seg_len);
    let mut max_mag = 0.0f64;
    let mut total = C64::new(0.0, 0.0);
    for (&z, &w) in rule.nodes.iter().zip(rule.weights.iter()) {
        let v = f(z);
        max_mag = max_mag.max(v.norm());
        total += v * w;
    }
    if opts.check_decay {
        let e0 = f(path.start()).norm();
        let e1 = f(path.end()).norm();
        let edge = e0.max(e1);
        if max_mag > 0.0 && edge > opts.decay_tol * max_mag {
            let ratio = edge / max_mag;
            // Gaussian-tail heuristic for how much wider the window must be.
            let factor = (ratio.ln() / opts.decay_tol.ln()).max(1.0).sqrt() * 1.5;
            return Err(Error::DecayCheck {
                ratio,
                suggested_extent: path.extent() * factor,
            });
        }
    }
    Ok(total)
}

/// Checks the delta scaling relation
/// `δ_c^ε(a q) = sign(Re a)/a · δ_c^{ε/a²}(q)` pointwise on path samples and
/// by sifting a Gaussian test function through both sides.
///
/// Returns the maximum pointwise deviation. `Re(a) = 0` is rejected, and every
/// nonzero sample must satisfy the convergence condition
/// `Re(a² q² / ε) > 0`.
pub fn delta_scaling_check(
    a: C64,
    eps: C64,
    path: &ContourPath,
    test_center: C64,
) -> Result<f64> {
    if a.re == 0.0 {
        return Err(Error::InvalidParameter(
            "delta scaling needs Re(a) != 0 (sign undefined)".into(),
        ));
    }
    let sign = step_sign(a.re);
    let eps_scaled = eps / (a * a);
    let rule = PathRule::build(path, QuadOptions::for_delta_width(eps).max_seg_len);
    let mut worst = 0.0f64;
    for &q in &rule.nodes {
        if q.norm() > 1e-12 {
            let conv = (a * a * q * q / eps).re;
            if conv <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "convergence window violated at q = {q}: Re(a² q²/ε) = {conv:.3e}"
                )));
            }
        }
        let lhs = smeared_delta(a * q, eps);
        let rhs = smeared_delta(q, eps_scaled) * (sign / a);
        worst = worst.max((lhs - rhs).norm());
    }

    // both sides must sift a test function identically
    let f = |q: C64| (-(q * q) / 2.0).exp();
    let opts = QuadOptions::for_delta_width(eps);
    let lhs_sift = contour_integrate(
        |q| f(q) * smeared_delta(a * (q - test_center), eps),
        path,
        &opts,
    )?;
    let rhs_sift = contour_integrate(
        |q| f(q) * smeared_delta(q - test_center, eps_scaled) * (sign / a),
        path,
        &opts,
    )?;
    worst = worst.max((lhs_sift - rhs_sift).norm());
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Polynomials and the analyticity-preserving split
// ---------------------------------------------------------------------------

/// Finite-degree polynomial with complex coefficients, `value = Σ c_k z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFunction {
    coeffs: Vec<C64>,
}

impl PolyFunction {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if !coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::InvalidParameter(
                "polynomial has non-finite coefficients".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    /// Build from (power, coefficient) pairs.
    pub fn from_terms(terms: &[(usize, C64)]) -> Self {
        let deg = terms.iter().map(|(n, _)| *n).max().unwrap_or(0);
        let mut coeffs = vec![C64::new(0.0, 0.0); deg + 1];
        for &(n, c) in terms {
            coeffs[n] += c;
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| c.norm() > 0.0)
            .unwrap_or(0)
    }

    pub fn eval(&self, z: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        Self { coeffs }
    }

    /// Coefficient-conjugated polynomial (the analyticity-preserving
    /// conjugate: the variable stays untouched).
    pub fn conj_coeffs(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = vec![C64::new(0.0, 0.0); n];
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c = self.coeff(k) + rhs.coeff(k);
        }
        Self { coeffs }
    }
}

/// Split into the coefficient-real and coefficient-imaginary parts, so that
/// `p = re_part + i*im_part` as functions of the kept-analytic variable.
pub fn poly_reim_split(p: &PolyFunction) -> (PolyFunction, PolyFunction) {
    let re = p
        .coeffs
        .iter()
        .map(|c| C64::new(c.re, 0.0))
        .collect::<Vec<_>>();
    let im = p
        .coeffs
        .iter()
        .map(|c| C64::new(c.im, 0.0))
        .collect::<Vec<_>>();
    (PolyFunction { coeffs: re }, PolyFunction { coeffs: im })
}

/// Gaussian-times-polynomial test function `f(q) = exp(-q²/s) * poly(q)`.
/// Analytic, decays along every permitted path, and its derivatives are
/// available in closed form for sifting oracles.
#[derive(Debug, Clone)]
pub struct GaussPoly {
    pub scale: f64,
    pub poly: PolyFunction,
}

impl GaussPoly {
    pub fn new(scale: f64, poly: PolyFunction) -> Result<Self> {
        if scale <= 0.0 {
            return Err(Error::InvalidParameter("gaussian scale must be > 0".into()));
        }
        Ok(Self { scale, poly })
    }

    pub fn eval(&self, q: C64) -> C64 {
        (-(q * q) / self.scale).exp() * self.poly.eval(q)
    }

    /// Second derivative via the product rule; used by first-order sifting
    /// oracles (`∫ f δ_c^ε = f + ε f'' + O(ε²)`).
    pub fn second_derivative(&self, q: C64) -> C64 {
        let g = (-(q * q) / self.scale).exp();
        let p = self.poly.eval(q);
        let dp = self.poly.derivative().eval(q);
        let ddp = self.poly.derivative().derivative().eval(q);
        let a = -2.0 / self.scale;
        // (g p)'' = g'' p + 2 g' p' + g p''  with g' = a q g, g'' = (a + a² q²) g
        g * ((a + a * a * q * q) * p + 2.0 * (a * q) * dp + ddp)
    }
}
