//! Complex scalars with compensated summation and tolerant comparison.
//!
//! All character and gamma values are complex doubles. Exact identities over
//! finite groups are checked through an absolute tolerance, never raw
//! equality; sums use Kahan compensation in a fixed deterministic order so
//! that results are bit-identical across runs and thread counts.

pub use num_complex::Complex64 as C;

/// Default absolute comparison tolerance for sums with fewer than 10^6 terms.
pub const TOL: f64 = 1e-8;

/// Looser tolerance for sums with 10^6 terms or more.
pub const TOL_LARGE: f64 = 1e-6;

/// Tolerance appropriate for a sum with `terms` unit-modulus terms.
pub fn tol_for_terms(terms: usize) -> f64 {
    if terms < 1_000_000 {
        TOL
    } else {
        TOL_LARGE
    }
}

/// `|a - b| <= tol`.
pub fn approx_eq(a: C, b: C, tol: f64) -> bool {
    (a - b).norm() <= tol
}

/// Kahan–Neumaier compensated accumulator over complex doubles.
///
/// Addition order is significant for bit-level reproducibility; callers must
/// feed terms in a deterministic order.
#[derive(Clone, Copy, Debug)]
pub struct Kahan {
    sum: C,
    comp: C,
}

impl Kahan {
    pub fn new() -> Self {
        Kahan {
            sum: C::new(0.0, 0.0),
            comp: C::new(0.0, 0.0),
        }
    }

    pub fn add(&mut self, term: C) {
        self.comp.re += neumaier_step(&mut self.sum.re, term.re);
        self.comp.im += neumaier_step(&mut self.sum.im, term.im);
    }

    pub fn value(&self) -> C {
        self.sum + self.comp
    }
}

impl Default for Kahan {
    fn default() -> Self {
        Self::new()
    }
}

/// One Neumaier update of a running real sum; returns the compensation term.
fn neumaier_step(sum: &mut f64, term: f64) -> f64 {
    let t = *sum + term;
    let comp = if sum.abs() >= term.abs() {
        (*sum - t) + term
    } else {
        (term - t) + *sum
    };
    *sum = t;
    comp
}
