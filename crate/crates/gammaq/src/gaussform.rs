//! Closed-form Gauss-sum products for the four gamma factors, together with
//! the inertia-parameter multisets they are built from.
//!
//! Each gamma factor of a cuspidal datum factors as a signed power of q times
//! a product of Gauss sums τ(χ, ψ) over characters read off from the
//! parameter α. For the exterior-square factor two candidate variants exist,
//! differing by one τ(α, ψ_n) factor; both are produced so the exhaustive
//! computation can arbitrate between them.

use crate::ffchar::{gauss_sum, AddChar, El, FieldTower, MultChar, ONE};
use crate::scalar::C;
use crate::{Error, Result};

/// Which gamma factor a multiset or product refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairKind {
    Tensor,
    Asai,
    Exterior,
}

/// A multiset of character exponents at a fixed tower degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenMultiset {
    pub degree: u32,
    pub exponents: Vec<u64>,
}

impl EigenMultiset {
    fn new(degree: u32, mut exponents: Vec<u64>) -> EigenMultiset {
        exponents.sort_unstable();
        EigenMultiset { degree, exponents }
    }

    /// Apply e ↦ q·e (mod q^degree − 1) to every element.
    pub fn frobenius(&self, t: &FieldTower) -> EigenMultiset {
        let m = t.unit_order(self.degree) as u128;
        EigenMultiset::new(
            self.degree,
            self.exponents
                .iter()
                .map(|&e| (e as u128 * t.q as u128 % m) as u64)
                .collect(),
        )
    }

    /// Partition into orbits of e ↦ q·e; each orbit sorted, orbits sorted.
    pub fn orbits(&self, t: &FieldTower) -> Vec<Vec<u64>> {
        let m = t.unit_order(self.degree) as u128;
        let mut remaining = self.exponents.clone();
        let mut out = Vec::new();
        while let Some(&e0) = remaining.first() {
            let mut orbit = Vec::new();
            let mut e = e0 as u128;
            loop {
                orbit.push(e as u64);
                e = e * t.q as u128 % m;
                if e == e0 as u128 {
                    break;
                }
            }
            orbit.sort_unstable();
            for x in &orbit {
                let pos = remaining
                    .iter()
                    .position(|y| y == x)
                    .expect("multiset not Frobenius-stable");
                remaining.remove(pos);
            }
            out.push(orbit);
        }
        out.sort();
        out
    }
}

/// Inertia multiset of a pairing. For `Tensor` pass both parameters (each of
/// degree n over the degree-1 base): {α^{q^i}·β^{q^j}}. For `Asai` pass the
/// parameter of degree 2n: {α^{q^{2i}+q^{2j+1}}} at degree 2n. For
/// `Exterior` pass the degree-n parameter: {α^{q^i+q^j} : i < j}.
pub fn inertia_multiset(
    t: &FieldTower,
    kind: PairKind,
    alpha: &MultChar,
    beta: Option<&MultChar>,
) -> Result<EigenMultiset> {
    match kind {
        PairKind::Tensor => {
            let beta = beta.ok_or_else(|| Error::Config("tensor multiset needs two parameters".into()))?;
            if alpha.degree != beta.degree {
                return Err(Error::Config("tensor parameters must share a degree".into()));
            }
            let n = alpha.degree;
            let m = t.unit_order(n) as u128;
            let mut v = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let ea = alpha.exponent as u128 * (t.q as u128).pow(i) % m;
                    let eb = beta.exponent as u128 * (t.q as u128).pow(j) % m;
                    v.push(((ea + eb) % m) as u64);
                }
            }
            Ok(EigenMultiset::new(n, v))
        }
        PairKind::Asai => {
            if alpha.degree % 2 != 0 {
                return Err(Error::Config("Asai multiset needs an even-degree parameter".into()));
            }
            let n = alpha.degree / 2;
            let m = t.unit_order(alpha.degree) as u128;
            let mut v = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let f = ((t.q as u128).pow(2 * i) + (t.q as u128).pow(2 * j + 1)) % m;
                    v.push((alpha.exponent as u128 * f % m) as u64);
                }
            }
            Ok(EigenMultiset::new(alpha.degree, v))
        }
        PairKind::Exterior => {
            let n = alpha.degree;
            let m = t.unit_order(n) as u128;
            let mut v = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    let f = ((t.q as u128).pow(i) + (t.q as u128).pow(j)) % m;
                    v.push((alpha.exponent as u128 * f % m) as u64);
                }
            }
            Ok(EigenMultiset::new(n, v))
        }
    }
}

fn sign(s: i64) -> f64 {
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// α^{c}: the character with exponent c·e at the same degree.
fn power(t: &FieldTower, chi: &MultChar, c: u128) -> MultChar {
    let m = t.unit_order(chi.degree) as u128;
    MultChar {
        degree: chi.degree,
        exponent: (chi.exponent as u128 * c % m) as u64,
    }
}

/// τ(χ, ψ) with χ given at `chi.degree` and ψ lifted to the same degree.
fn tau(t: &FieldTower, chi: &MultChar, psi: &AddChar) -> C {
    gauss_sum(t, chi, &psi.at_degree(t, chi.degree))
}

/// Rankin–Selberg product: for π₁, π₂ cuspidal of GL_n(F_q) with parameters
/// α, β of degree n,
/// γ*(π₁×π₂) = ω_{π₂}(−1)^{n−1} · (−1)^n · q^{−n²/2} · ∏_{i<n} τ(α·β^{q^i}, ψ_n).
pub fn rs_product(t: &FieldTower, alpha: &MultChar, beta: &MultChar, psi: &AddChar) -> C {
    let n = alpha.degree;
    let m = t.unit_order(n) as u128;
    let q = t.q as f64;
    let minus_one: El = t.neg(ONE);
    let omega_m1 = if (n - 1) % 2 == 0 {
        C::new(1.0, 0.0)
    } else {
        MultChar {
            degree: n,
            exponent: beta.exponent,
        }
        .eval(t, minus_one)
    };
    let mut prod = C::new(sign(n as i64), 0.0) * omega_m1 * q.powf(-((n * n) as f64) / 2.0);
    for i in 0..n {
        let eb = beta.exponent as u128 * (t.q as u128).pow(i) % m;
        let chi = MultChar {
            degree: n,
            exponent: ((alpha.exponent as u128 + eb) % m) as u64,
        };
        prod *= tau(t, &chi, psi);
    }
    prod
}

/// Asai product: for π cuspidal of GL_n(E), E = F_{q^2}, with parameter α of
/// degree 2n,
/// γ(π, As) = ω_π(Δ)^{n−1} · (−1)^{n(n+1)/2} · q^{−n²/2}
///            · τ(α^{1+q^{2m+1}} ↓ d, ψ_d) · ∏_{i<m} τ(α^{1+q^{2i+1}}, ψ_{2n}),
/// with m = ⌊(n−1)/2⌋ and d = n for odd n, 2n for even n; Δ is a trace-zero
/// unit of E.
pub fn asai_product(t: &FieldTower, alpha: &MultChar, psi: &AddChar, delta: El) -> C {
    let nn = alpha.degree; // 2n
    let n = nn / 2;
    let q = t.q as f64;
    let m = (n - 1) / 2;
    let d = if n % 2 == 1 { n } else { nn };
    let omega_delta = if (n - 1) % 2 == 0 {
        C::new(1.0, 0.0)
    } else {
        alpha.eval(t, delta)
    };
    let mut prod = omega_delta
        * C::new(sign((n * (n + 1) / 2) as i64), 0.0)
        * q.powf(-((n * n) as f64) / 2.0);
    let top = power(t, alpha, 1 + (t.q as u128).pow(2 * m + 1));
    prod *= tau(t, &top.norm_descend(t, d), psi);
    for i in 0..m {
        let chi = power(t, alpha, 1 + (t.q as u128).pow(2 * i + 1));
        prod *= tau(t, &chi, psi);
    }
    prod
}

/// The two exterior-square candidates and the Bump–Friedberg product, for a
/// degree-n parameter α. With m = ⌊n/2⌋ and d = n for odd n, m for even n:
///
/// * `ext_with_tau1` = (−1)^{C(n,2)} q^{−C(n,2)/2} τ(α,ψ_n) τ(α^{1+q^m}↓d,ψ_d)
///   ∏_{i=1}^{m−1} τ(α^{1+q^i},ψ_n) — the variant carrying a τ(α,ψ_n) factor;
/// * `ext` = the same without the τ(α,ψ_n) factor — the variant the
///   exhaustive computation confirms;
/// * `bf`  = (−1)^{n+C(n,2)} q^{−(n+C(n,2))/2} τ(α,ψ_n) τ(α^{1+q^m}↓d,ψ_d)
///   ∏_{i=1}^{m−1} τ(α^{1+q^i},ψ_n).
pub struct ExtBfProducts {
    pub ext: C,
    pub ext_with_tau1: C,
    pub bf: C,
}

pub fn ext_bf_products(t: &FieldTower, alpha: &MultChar, psi: &AddChar) -> ExtBfProducts {
    let n = alpha.degree;
    let q = t.q as f64;
    let m = n / 2;
    let d = if n % 2 == 1 { n } else { m };
    let c2 = (n * (n - 1) / 2) as i64;
    let mut core = C::new(1.0, 0.0);
    let top = power(t, alpha, 1 + (t.q as u128).pow(m));
    core *= tau(t, &top.norm_descend(t, d), psi);
    for i in 1..m {
        core *= tau(t, &power(t, alpha, 1 + (t.q as u128).pow(i)), psi);
    }
    let tau1 = tau(t, alpha, psi);
    let ext = C::new(sign(c2), 0.0) * q.powf(-(c2 as f64) / 2.0) * core;
    let ext_with_tau1 = ext * tau1;
    let bf = C::new(sign(n as i64 + c2), 0.0)
        * q.powf(-((n as i64 + c2) as f64) / 2.0)
        * tau1
        * core;
    ExtBfProducts {
        ext,
        ext_with_tau1,
        bf,
    }
}
