//! Dense complex matrix and vector carriers.
//!
//! Everything at desk scale (dimension up to a few hundred) is dense; the
//! matrix exponential uses scaling-and-squaring with Padé approximants
//! (Higham 2005) so it stays reliable for non-normal matrices, and linear
//! systems go through LU with partial pivoting.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Dense complex square matrix of a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    data: Array2<C64>,
}

/// Dense complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    data: Array1<C64>,
}

fn finite(z: &C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

impl OperatorMatrix {
    pub fn new(data: Array2<C64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::InvalidParameter(format!(
                "operator matrix must be square, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if !data.iter().all(finite) {
            return Err(Error::InvalidParameter(
                "operator matrix has non-finite entries".into(),
            ));
        }
        Ok(Self { data })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: Array2::zeros((dim, dim)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Array2::zeros((dim, dim));
        for i in 0..dim {
            m[[i, i]] = C64::new(1.0, 0.0);
        }
        Self { data: m }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn array(&self) -> &Array2<C64> {
        &self.data
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.data[[i, j]]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[[i, j]] = v;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            data: self.data.t().mapv(|z| z.conj()),
        }
    }

    /// Plain transpose (no conjugation).
    pub fn transpose(&self) -> Self {
        Self {
            data: self.data.t().to_owned(),
        }
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            data: self.data.mapv(|z| z.conj()),
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            data: self.data.mapv(|z| z * c),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            data: &self.data + &rhs.data,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self {
            data: &self.data - &rhs.data,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            data: self.data.dot(&rhs.data),
        }
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        StateVector {
            data: self.data.dot(&v.data),
        }
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        self.mul(rhs).sub(&rhs.mul(self))
    }

    pub fn anticommutator(&self, rhs: &Self) -> Self {
        self.mul(rhs).add(&rhs.mul(self))
    }

    pub fn hermitian_part(&self) -> Self {
        self.add(&self.adjoint()).scaled(C64::new(0.5, 0.0))
    }

    pub fn antihermitian_part(&self) -> Self {
        self.sub(&self.adjoint()).scaled(C64::new(0.5, 0.0))
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest entry magnitude over the leading `dim - guard` rows/columns.
    /// The trailing corner of a truncated ladder basis is an artifact and is
    /// excluded from algebraic checks.
    pub fn interior_max_abs(&self, guard: usize) -> f64 {
        let n = self.dim().saturating_sub(guard);
        let mut m = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                m = m.max(self.data[[i, j]].norm());
            }
        }
        m
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for j in 0..self.dim() {
            let s: f64 = self.data.column(j).iter().map(|z| z.norm()).sum();
            best = best.max(s);
        }
        best
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.sub(&self.adjoint()).max_abs() <= tol
    }

    /// Matrix exponential, scaling-and-squaring with Padé approximants.
    pub fn expm(&self) -> Self {
        expm(self)
    }

    /// Solve `self * x = b` by LU with partial pivoting.
    pub fn solve(&self, b: &StateVector) -> Result<StateVector> {
        let lu = LuFactors::factor(self)?;
        Ok(lu.solve(b))
    }

    /// Largest eigenvalue of a Hermitian matrix by shifted power iteration.
    /// Deterministic start vector; adequate for growth-rate estimates.
    pub fn hermitian_max_eig(&self) -> f64 {
        let n = self.dim();
        if n == 0 {
            return 0.0;
        }
        let shift = self.one_norm();
        let mut v = StateVector::constant(n, C64::new(1.0, 0.0));
        v = v.scaled(C64::new(1.0 / v.norm().max(1e-300), 0.0));
        let mut lambda = 0.0;
        for _ in 0..300 {
            let mut w = self.apply(&v);
            w = w.add(&v.scaled(C64::new(shift, 0.0)));
            let nrm = w.norm();
            if nrm < 1e-300 {
                return -shift;
            }
            v = w.scaled(C64::new(1.0 / nrm, 0.0));
            lambda = nrm - shift;
        }
        // one Rayleigh refinement
        let hv = self.apply(&v);
        let r = v.dot(&hv) / v.dot(&v);
        if r.re.is_finite() {
            lambda = r.re;
        }
        lambda
    }
}

impl StateVector {
    pub fn new(data: Array1<C64>) -> Result<Self> {
        if !data.iter().all(finite) {
            return Err(Error::InvalidParameter(
                "state vector has non-finite entries".into(),
            ));
        }
        Ok(Self { data })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: Array1::zeros(dim),
        }
    }

    pub fn constant(dim: usize, c: C64) -> Self {
        Self {
            data: Array1::from_elem(dim, c),
        }
    }

    /// Basis vector |n>.
    pub fn basis_state(dim: usize, n: usize) -> Self {
        let mut v = Array1::zeros(dim);
        v[n] = C64::new(1.0, 0.0);
        Self { data: v }
    }

    pub fn from_slice(values: &[C64]) -> Self {
        Self {
            data: Array1::from_vec(values.to_vec()),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn array(&self) -> &Array1<C64> {
        &self.data
    }

    pub fn at(&self, i: usize) -> C64 {
        self.data[i]
    }

    pub fn set(&mut self, i: usize, v: C64) {
        self.data[i] = v;
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Conjugating inner product `<self|other>`.
    pub fn dot(&self, other: &Self) -> C64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Analytic pairing: plain transpose product, no conjugation.
    pub fn tdot(&self, other: &Self) -> C64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn conj(&self) -> Self {
        Self {
            data: self.data.mapv(|z| z.conj()),
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            data: self.data.mapv(|z| z * c),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            data: &self.data + &rhs.data,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self {
            data: &self.data - &rhs.data,
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::ZeroState);
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }
}

// ---------------------------------------------------------------------------
// LU with partial pivoting
// ---------------------------------------------------------------------------

pub struct LuFactors {
    lu: Array2<C64>,
    piv: Vec<usize>,
}

impl LuFactors {
    pub fn factor(m: &OperatorMatrix) -> Result<Self> {
        let n = m.dim();
        let mut lu = m.data.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[[k, k]].norm();
            for i in (k + 1)..n {
                let v = lu[[i, k]].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::IllConditioned {
                    what: "singular matrix in LU factorization".into(),
                    estimate: f64::INFINITY,
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap([k, j], [p, j]);
                }
                piv.swap(k, p);
            }
            let pivot = lu[[k, k]];
            for i in (k + 1)..n {
                let f = lu[[i, k]] / pivot;
                lu[[i, k]] = f;
                for j in (k + 1)..n {
                    let sub = f * lu[[k, j]];
                    lu[[i, j]] -= sub;
                }
            }
        }
        Ok(Self { lu, piv })
    }

    pub fn solve(&self, b: &StateVector) -> StateVector {
        let n = self.lu.nrows();
        let mut x = Array1::<C64>::zeros(n);
        for i in 0..n {
            x[i] = b.data[self.piv[i]];
        }
        // forward
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[[i, j]] * x[j];
            }
            x[i] = s;
        }
        // back
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[[i, j]] * x[j];
            }
            x[i] = s / self.lu[[i, i]];
        }
        StateVector { data: x }
    }
}

// ---------------------------------------------------------------------------
// Matrix exponential (Higham's scaling-and-squaring)
// ---------------------------------------------------------------------------

const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068;
const THETA_13: f64 = 5.371_920_351_148_152;

fn pade_low(a: &OperatorMatrix, b: &[f64]) -> OperatorMatrix {
    // [m/m] Padé for m in {3,5,7,9}: coefficients b[0..=m]
    let n = a.dim();
    let ident = OperatorMatrix::identity(n);
    let a2 = a.mul(a);
    let mut u = ident.scaled(C64::new(b[1], 0.0));
    let mut v = ident.scaled(C64::new(b[0], 0.0));
    let mut pow = ident.clone(); // a2^k
    let mut k = 1;
    while 2 * k + 1 <= b.len() - 1 {
        pow = pow.mul(&a2);
        u = u.add(&pow.scaled(C64::new(b[2 * k + 1], 0.0)));
        v = v.add(&pow.scaled(C64::new(b[2 * k], 0.0)));
        k += 1;
    }
    u = a.mul(&u);
    solve_pade(&u, &v)
}

fn solve_pade(u: &OperatorMatrix, v: &OperatorMatrix) -> OperatorMatrix {
    // (v - u) x = (v + u)
    let n = u.dim();
    let lhs = v.sub(u);
    let rhs = v.add(u);
    let lu = LuFactors::factor(&lhs).expect("expm: Padé denominator singular");
    let mut out = Array2::<C64>::zeros((n, n));
    for j in 0..n {
        let col = StateVector {
            data: rhs.data.column(j).to_owned(),
        };
        let x = lu.solve(&col);
        for i in 0..n {
            out[[i, j]] = x.data[i];
        }
    }
    OperatorMatrix { data: out }
}

pub fn expm(a: &OperatorMatrix) -> OperatorMatrix {
    let n = a.dim();
    if n == 0 {
        return OperatorMatrix::zeros(0);
    }
    let norm = a.one_norm();

    const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
    const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
    const B7: [f64; 8] = [
        17_297_280.0,
        8_648_640.0,
        1_995_840.0,
        277_200.0,
        25_200.0,
        1512.0,
        56.0,
        1.0,
    ];
    const B9: [f64; 10] = [
        17_643_225_600.0,
        8_821_612_800.0,
        2_075_673_600.0,
        302_702_400.0,
        30_270_240.0,
        2_162_160.0,
        110_880.0,
        3960.0,
        90.0,
        1.0,
    ];
    const B13: [f64; 14] = [
        64_764_752_532_480_000.0,
        32_382_376_266_240_000.0,
        7_771_770_303_897_600.0,
        1_187_353_796_428_800.0,
        129_060_195_264_000.0,
        10_559_470_521_600.0,
        670_442_572_800.0,
        33_522_128_640.0,
        1_323_241_920.0,
        40_840_800.0,
        960_960.0,
        16_380.0,
        182.0,
        1.0,
    ];

    if norm <= THETA_3 {
        return pade_low(a, &B3);
    }
    if norm <= THETA_5 {
        return pade_low(a, &B5);
    }
    if norm <= THETA_7 {
        return pade_low(a, &B7);
    }
    if norm <= THETA_9 {
        return pade_low(a, &B9);
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let a_s = a.scaled(C64::new(1.0 / 2f64.powi(s as i32), 0.0));

    // Padé 13
    let ident = OperatorMatrix::identity(n);
    let a2 = a_s.mul(&a_s);
    let a4 = a2.mul(&a2);
    let a6 = a4.mul(&a2);
    let b = &B13;
    let u_hi = a6
        .scaled(C64::new(b[13], 0.0))
        .add(&a4.scaled(C64::new(b[11], 0.0)))
        .add(&a2.scaled(C64::new(b[9], 0.0)));
    let u = a_s.mul(
        &a6.mul(&u_hi)
            .add(&a6.scaled(C64::new(b[7], 0.0)))
            .add(&a4.scaled(C64::new(b[5], 0.0)))
            .add(&a2.scaled(C64::new(b[3], 0.0)))
            .add(&ident.scaled(C64::new(b[1], 0.0))),
    );
    let v_hi = a6
        .scaled(C64::new(b[12], 0.0))
        .add(&a4.scaled(C64::new(b[10], 0.0)))
        .add(&a2.scaled(C64::new(b[8], 0.0)));
    let v = a6
        .mul(&v_hi)
        .add(&a6.scaled(C64::new(b[6], 0.0)))
        .add(&a4.scaled(C64::new(b[4], 0.0)))
        .add(&a2.scaled(C64::new(b[2], 0.0)))
        .add(&ident.scaled(C64::new(b[0], 0.0)));

    let mut result = solve_pade(&u, &v);
    for _ in 0..s {
        result = result.mul(&result);
    }
    result
}
