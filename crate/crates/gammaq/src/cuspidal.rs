//! Cuspidal characters of GL_n over a tower field, Bessel functions via
//! ψ-projection, central characters, and period (subgroup) multiplicities.
//!
//! A cuspidal representation π of GL_n(F_{q^d}) is indexed by a regular
//! multiplicative character α of F_{q^{d·n}}^×. Its character is computed by
//! the classical closed formula: zero off the classes whose characteristic
//! polynomial is a power of a single irreducible f, and otherwise
//! (−1)^{n−1} · ∏_{i=1}^{k−1}(1 − q_d^{deg_f·i}) · Σ_j α(x^{q_d^j}), with x a
//! root of f and k the Jordan-block count. The formula is gated by
//! orthogonality, cuspidality, and Whittaker-normalization checks in the
//! test and verification suites, which pin it uniquely.

use crate::ffchar::{AddChar, El, FieldTower, MultChar, RelChar, ONE};
use crate::matgrp::{j_embed, ClassData, Ctx, Mat};
use crate::scalar::C;
use crate::{Error, Result};
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

/// A cuspidal representation of GL_n(F_{q^d}), given by its regular
/// parameter α (a character of F_{q^{d·n}}^×).
pub struct Cuspidal {
    pub n: usize,
    /// Tower degree of the base field (1 ordinarily, 2 for the Asai base E).
    pub base_degree: u32,
    pub alpha: MultChar,
    /// Character values keyed by class invariants.
    values: RwLock<HashMap<Vec<u64>, C>>,
}

impl Cuspidal {
    pub fn new(t: &FieldTower, n: usize, base_degree: u32, alpha: MultChar) -> Result<Cuspidal> {
        if alpha.degree != base_degree * n as u32 {
            return Err(Error::Config(format!(
                "parameter degree {} != base {} × n {}",
                alpha.degree, base_degree, n
            )));
        }
        if !alpha.is_regular_over(t, base_degree) {
            return Err(Error::Config(format!(
                "character exponent {} is not regular over degree {base_degree}",
                alpha.exponent
            )));
        }
        Ok(Cuspidal {
            n,
            base_degree,
            alpha,
            values: RwLock::new(HashMap::new()),
        })
    }

    /// |F_{q^d}| − adjusted base-field size q_d = q^{base_degree}.
    pub fn q_base(&self, t: &FieldTower) -> u64 {
        t.q.pow(self.base_degree)
    }

    /// The contragredient π̌, indexed by α^{-1}.
    pub fn dual(&self, t: &FieldTower) -> Cuspidal {
        Cuspidal::new(t, self.n, self.base_degree, self.alpha.inverse(t)).expect("dual is regular")
    }

    /// Frobenius orbit of the parameter exponent (decides equivalence).
    pub fn orbit(&self, t: &FieldTower) -> Vec<u64> {
        let m = t.unit_order(self.alpha.degree) as u128;
        let mul = t.q.pow(self.base_degree) as u128;
        let mut out = Vec::new();
        let mut e = self.alpha.exponent as u128;
        loop {
            out.push(e as u64);
            e = e * mul % m;
            if e == self.alpha.exponent as u128 {
                break;
            }
        }
        out.sort_unstable();
        out
    }

    /// π ≅ π′ iff the parameters are Frobenius-conjugate.
    pub fn isomorphic(&self, t: &FieldTower, other: &Cuspidal) -> bool {
        self.n == other.n
            && self.base_degree == other.base_degree
            && self.orbit(t) == other.orbit(t)
    }

    /// Character degree χ(1) = ∏_{i=1}^{n−1}(q_d^i − 1).
    pub fn dim(&self, t: &FieldTower) -> f64 {
        let qd = self.q_base(t) as f64;
        (1..self.n).map(|i| qd.powi(i as i32) - 1.0).product()
    }

    /// Character value from precomputed class invariants.
    pub fn value_of_class(&self, ctx: &Ctx, cd: &ClassData) -> C {
        let key = cd.cache_key();
        if let Some(v) = self.values.read().unwrap().get(&key) {
            return *v;
        }
        let t = &ctx.t;
        let v = match cd {
            ClassData::Null => C::new(0.0, 0.0),
            ClassData::Primary {
                deg_f, k, root, ..
            } => {
                let qd = self.q_base(t) as f64;
                let mut coeff = if self.n % 2 == 0 { -1.0 } else { 1.0 };
                for i in 1..*k {
                    coeff *= 1.0 - qd.powi((*deg_f * i) as i32);
                }
                let step = t.q.pow(self.base_degree);
                let mut galois = C::new(0.0, 0.0);
                let mut x = *root;
                for _ in 0..*deg_f {
                    galois += self.alpha.eval(t, x);
                    x = t.pow(x, step);
                }
                coeff * galois
            }
        };
        self.values.write().unwrap().insert(key, v);
        v
    }

    /// χ_π(g).
    pub fn char_value(&self, ctx: &Ctx, g: &Mat) -> C {
        debug_assert_eq!(g.d, self.base_degree);
        self.value_of_class(ctx, &ctx.class_data(g))
    }

    /// ω_π(a) = α(a) for a ∈ F_{q^d}^×.
    pub fn central_character(&self, ctx: &Ctx, a: El) -> C {
        assert!(a.is_some(), "central character undefined at 0");
        debug_assert!(ctx.t.in_subfield(a, self.base_degree));
        self.alpha.eval(&ctx.t, a)
    }

    /// Exact test: ω_π restricted to F_q^× (the degree-1 level) is trivial.
    pub fn omega_trivial_on_f(&self, t: &FieldTower) -> bool {
        let big = t.unit_order(self.alpha.degree);
        let cof = big / t.unit_order(1);
        // α(g_1^j) = ζ^{e·cof·j}; trivial iff big | e·cof.
        (self.alpha.exponent as u128 * cof as u128) % big as u128 == 0
    }
}

/// The character of N_n used by Whittaker/Bessel machinery: an additive
/// character of the base field applied to the superdiagonal sum, either the
/// plain ψ_a or the relative ψ_{E/F} of the Asai setting.
#[derive(Clone, Copy, Debug)]
pub enum NChar {
    Abs(AddChar),
    Rel(RelChar),
}

impl NChar {
    pub fn conj(&self) -> NChar {
        match self {
            NChar::Abs(a) => NChar::Abs(a.conj()),
            NChar::Rel(r) => NChar::Rel(r.conj()),
        }
    }

    /// Value on an element x of the base field (the superdiagonal sum).
    pub fn eval_el(&self, t: &FieldTower, x: El) -> C {
        match self {
            NChar::Abs(a) => a.eval(t, x),
            NChar::Rel(r) => r.eval(t, x),
        }
    }

    /// ψ(u) for upper unitriangular u: the character of the superdiagonal sum.
    pub fn eval_n(&self, t: &FieldTower, u: &Mat) -> C {
        self.eval_el(t, u.superdiagonal_sum(t))
    }

    /// A stable identifier entering cache keys.
    pub fn cache_tag(&self) -> String {
        match self {
            NChar::Abs(a) => format!(
                "abs-d{}-t{}-i{}",
                a.degree,
                a.twist.unwrap_or(u64::MAX),
                a.inverse as u8
            ),
            NChar::Rel(r) => format!(
                "rel-D{}-t{}-i{}",
                r.delta.unwrap_or(u64::MAX),
                r.base.twist.unwrap_or(u64::MAX),
                r.base.inverse as u8
            ),
        }
    }
}

/// The Bessel function B_{π,ψ}, computed by ψ-projection of the character:
/// B(g) = |N_n|^{-1} Σ_{u∈N_n} ψ(u)^{-1} χ_π(g·u), memoized per matrix.
pub struct Bessel<'a> {
    pub pi: &'a Cuspidal,
    pub psi: NChar,
    memo: RwLock<HashMap<Vec<u64>, C>>,
    /// Persistent backing, bound lazily on first evaluation when the context
    /// carries a disk cache. Flushed on drop.
    disk: RwLock<Option<(Arc<crate::cache::Cache>, String)>>,
    bound: RwLock<bool>,
}

impl<'a> Bessel<'a> {
    pub fn new(pi: &'a Cuspidal, psi: NChar) -> Bessel<'a> {
        Bessel {
            pi,
            psi,
            memo: RwLock::new(HashMap::new()),
            disk: RwLock::new(None),
            bound: RwLock::new(false),
        }
    }

    /// On first use, seed the memo from the context's disk cache (if any).
    fn bind_disk(&self, ctx: &Ctx) {
        let mut bound = self.bound.write().unwrap();
        if *bound {
            return;
        }
        *bound = true;
        if let Some(cache) = ctx.disk() {
            let key = format!(
                "{}/bessel-n{}-b{}-e{}-{}",
                ctx.cache_scope(),
                self.pi.n,
                self.pi.base_degree,
                self.pi.alpha.exponent,
                self.psi.cache_tag()
            );
            if let Some(entries) = cache.load::<Vec<(Vec<u64>, (f64, f64))>>(&key) {
                self.import_memo(entries);
            }
            *self.disk.write().unwrap() = Some((cache.clone(), key));
        }
    }

    pub fn value(&self, ctx: &Ctx, g: &Mat) -> C {
        self.bind_disk(ctx);
        let key = g.key();
        if let Some(v) = self.memo.read().unwrap().get(&key) {
            return *v;
        }
        let t = &ctx.t;
        let nn = ctx
            .nn(self.pi.n, self.pi.base_degree)
            .expect("N_n within budget");
        let mut acc = crate::scalar::Kahan::new();
        for u in nn.iter() {
            let term = self.psi.eval_n(t, u).conj() * self.pi.char_value(ctx, &g.mul(t, u));
            acc.add(term);
        }
        let v = acc.value() / nn.len() as f64;
        self.memo.write().unwrap().insert(key, v);
        v
    }

    /// Export the memo table sorted by key (for persistent caching).
    pub fn export_memo(&self) -> Vec<(Vec<u64>, (f64, f64))> {
        let mut v: Vec<_> = self
            .memo
            .read()
            .unwrap()
            .iter()
            .map(|(k, c)| (k.clone(), (c.re, c.im)))
            .collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    /// Seed the memo table from a persisted cache.
    pub fn import_memo(&self, entries: Vec<(Vec<u64>, (f64, f64))>) {
        let mut memo = self.memo.write().unwrap();
        for (k, (re, im)) in entries {
            memo.insert(k, C::new(re, im));
        }
    }
}

impl<'a> Drop for Bessel<'a> {
    fn drop(&mut self) {
        if let Some((cache, key)) = self.disk.get_mut().unwrap().take() {
            let _ = cache.store(&key, &self.export_memo());
        }
    }
}

/// Subgroups against which period multiplicities are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subgroup {
    /// Diagonal GL_n inside GL_n × GL_n (pair input).
    DiagPair,
    /// GL_n(F) inside GL_n(E) (Asai base).
    GaloisF,
    /// H_n = J(GL × GL), the interleaved Levi.
    HLevi,
    /// Shalika subgroup S_{2m} = {(1 X; 0 1)(g; g)} (even n).
    Shalika,
    /// Mirabolic P_n.
    Mirabolic,
    /// P_n ∩ H_n.
    MirabolicH,
}

/// Character of the subgroup entering the multiplicity.
#[derive(Clone, Copy, Debug)]
pub enum SubgroupChar {
    Trivial,
    /// Shalika character Θ((1 X;0 1)(g;g)) = ψ(Tr X); the additive character
    /// lives on the base field of π.
    ShalikaTheta(AddChar),
}

/// Representation input for multiplicity computations.
pub enum RepInput<'a> {
    Single(&'a Cuspidal),
    /// Outer pair π₁ ⊠ π₂ with χ = χ_{π₁}·χ_{π₂}.
    Pair(&'a Cuspidal, &'a Cuspidal),
}

fn retag(mut g: Mat, d: u32) -> Mat {
    g.d = d;
    g
}

/// dim Hom_L(Π|_L, Ξ) = round(|L|^{-1} Σ_{h∈L} χ_Π(h)·Ξ(h)^{-1}); errors when
/// the average is not an integer within tolerance (arithmetic bug).
pub fn period_multiplicity(
    ctx: &Ctx,
    rep: &RepInput<'_>,
    subgroup: Subgroup,
    xi: &SubgroupChar,
) -> Result<u64> {
    let t = &ctx.t;
    // Collect (h, Ξ(h)) pairs; h lives over the base degree of the input.
    let mut terms: Vec<(Mat, C)> = Vec::new();
    let one = C::new(1.0, 0.0);
    match (rep, subgroup) {
        (RepInput::Pair(p1, _), Subgroup::DiagPair) => {
            for g in ctx.gl(p1.n, p1.base_degree)?.iter() {
                terms.push((g.clone(), one));
            }
        }
        (RepInput::Single(pi), Subgroup::GaloisF) => {
            if pi.base_degree != 2 {
                return Err(Error::Config("GaloisF needs a representation over E".into()));
            }
            for g in ctx.gl(pi.n, 1)?.iter() {
                terms.push((retag(g.clone(), 2), one));
            }
        }
        (RepInput::Single(pi), Subgroup::HLevi) => {
            let d = pi.base_degree;
            let (a, b) = ((pi.n + 1) / 2, pi.n / 2);
            for g in ctx.gl(a, d)?.iter() {
                for gp in ctx.gl(b, d)?.iter() {
                    terms.push((j_embed(g, gp), one));
                }
            }
        }
        (RepInput::Single(pi), Subgroup::Shalika) => {
            if pi.n % 2 != 0 {
                return Err(Error::Config("Shalika subgroup needs even n".into()));
            }
            let m = pi.n / 2;
            let d = pi.base_degree;
            let theta = match xi {
                SubgroupChar::ShalikaTheta(a) => *a,
                SubgroupChar::Trivial => {
                    return Err(Error::Config("Shalika multiplicity needs Θ".into()))
                }
            };
            for g in ctx.gl(m, d)?.iter() {
                for x in ctx.all_matrices(m, d)?.iter() {
                    // (1 X; 0 1)(g; 0; 0 g) = (g, Xg; 0, g)
                    let mut s = Mat::zero(pi.n, d);
                    let xg = x.mul(t, g);
                    for i in 0..m {
                        for j in 0..m {
                            s.set(i, j, g.get(i, j));
                            s.set(i, j + m, xg.get(i, j));
                            s.set(i + m, j + m, g.get(i, j));
                        }
                    }
                    terms.push((s, theta.eval(t, x.trace(t))));
                }
            }
        }
        (RepInput::Single(pi), Subgroup::Mirabolic) => {
            for p in ctx.pn(pi.n, pi.base_degree)?.iter() {
                terms.push((p.clone(), one));
            }
        }
        (RepInput::Single(pi), Subgroup::MirabolicH) => {
            let d = pi.base_degree;
            let (a, b) = ((pi.n + 1) / 2, pi.n / 2);
            for g in ctx.gl(a, d)?.iter() {
                for gp in ctx.gl(b, d)?.iter() {
                    let j = j_embed(g, gp);
                    let n = pi.n;
                    let mirabolic = (0..n - 1).all(|c| j.get(n - 1, c).is_none())
                        && j.get(n - 1, n - 1) == ONE;
                    if mirabolic {
                        terms.push((j, one));
                    }
                }
            }
        }
        _ => {
            return Err(Error::Config(
                "subgroup/representation combination not supported".into(),
            ))
        }
    }

    let mut acc = crate::scalar::Kahan::new();
    for (h, xi_v) in &terms {
        let chi = match rep {
            RepInput::Single(pi) => pi.char_value(ctx, h),
            RepInput::Pair(p1, p2) => p1.char_value(ctx, h) * p2.char_value(ctx, h),
        };
        acc.add(chi * xi_v.conj());
    }
    let avg = acc.value() / terms.len() as f64;
    let rounded = avg.re.round();
    if (avg.re - rounded).abs() > 1e-6 || avg.im.abs() > 1e-6 || rounded < 0.0 {
        return Err(Error::Numeric(format!(
            "multiplicity average {avg} is not a non-negative integer"
        )));
    }
    Ok(rounded as u64)
}

impl Ctx {
    /// All n×n matrices over F_{q^d} (used for Shalika X-blocks).
    pub fn all_matrices(&self, n: usize, d: u32) -> Result<Vec<Mat>> {
        let elems = self.t.field_elements(d);
        let cells = n * n;
        let total = (elems.len() as u128).pow(cells as u32);
        if total > self.group_budget as u128 {
            return Err(Error::Budget(format!(
                "matrix-space scan of {total} exceeds budget"
            )));
        }
        let mut out = Vec::with_capacity(total as usize);
        let mut odo = vec![0usize; cells];
        for _ in 0..total {
            out.push(Mat {
                n,
                d,
                e: odo.iter().map(|&i| elems[i]).collect(),
            });
            for slot in odo.iter_mut() {
                *slot += 1;
                if *slot < elems.len() {
                    break;
                }
                *slot = 0;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffchar::{regular_classes, FieldTower};
    use crate::scalar::{approx_eq, TOL};

    fn ctx(p: u64, k: u32, n: u32, asai: bool) -> Ctx {
        Ctx::new(FieldTower::build(p, k, n, asai).unwrap())
    }

    fn cuspidals(ctx: &Ctx, base: u32, n: u32) -> Vec<Cuspidal> {
        regular_classes(&ctx.t, base, n)
            .into_iter()
            .map(|a| Cuspidal::new(&ctx.t, n as usize, base, a).unwrap())
            .collect()
    }

    #[test]
    fn character_degree() {
        let c = ctx(3, 1, 2, false);
        for pi in cuspidals(&c, 1, 2) {
            let v = pi.char_value(&c, &Mat::identity(2, 1));
            assert!(approx_eq(v, C::new(2.0, 0.0), TOL)); // q − 1
            assert_eq!(pi.dim(&c.t), 2.0);
        }
        let c = ctx(2, 1, 3, false);
        for pi in cuspidals(&c, 1, 3) {
            let v = pi.char_value(&c, &Mat::identity(3, 1));
            assert!(approx_eq(v, C::new(3.0, 0.0), TOL)); // (q−1)(q²−1)
        }
    }

    #[test]
    fn orthogonality_and_inequivalence() {
        for (p, k, n) in [(2u64, 1u32, 2u32), (3, 1, 2), (2, 2, 2), (2, 1, 3)] {
            let c = ctx(p, k, n, false);
            let gl = c.gl(n as usize, 1).unwrap();
            let pis = cuspidals(&c, 1, n);
            for (i, pi) in pis.iter().enumerate() {
                let mut norm = crate::scalar::Kahan::new();
                for g in gl.iter() {
                    let v = pi.char_value(&c, g);
                    norm.add(v * v.conj());
                }
                let total = norm.value();
                assert!(
                    approx_eq(total, C::new(gl.len() as f64, 0.0), 1e-6 * gl.len() as f64),
                    "Σ|χ|² = {total} ≠ |GL| = {} at (p^k,n)=({},{n})",
                    gl.len(),
                    c.t.q,
                );
                for (j, pj) in pis.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let mut ip = crate::scalar::Kahan::new();
                    for g in gl.iter() {
                        ip.add(pi.char_value(&c, g) * pj.char_value(&c, g).conj());
                    }
                    assert!(
                        approx_eq(ip.value() / gl.len() as f64, C::new(0.0, 0.0), 1e-8),
                        "inequivalent cuspidals must be orthogonal"
                    );
                }
            }
        }
    }

    #[test]
    fn frobenius_conjugate_parameter_gives_same_character() {
        let c = ctx(3, 1, 2, false);
        let gl = c.gl(2, 1).unwrap();
        for pi in cuspidals(&c, 1, 2) {
            let alpha_q = pi.alpha.frobenius(&c.t, 1);
            let pi_q = Cuspidal::new(&c.t, 2, 1, alpha_q).unwrap();
            for g in gl.iter() {
                assert!(approx_eq(pi.char_value(&c, g), pi_q.char_value(&c, g), TOL));
            }
            assert!(pi.isomorphic(&c.t, &pi_q));
        }
    }

    #[test]
    fn cuspidality_unipotent_averages_vanish() {
        // Exhaustive at (n,q) = (2,3): Σ_{u∈U_P} χ(g·u) = 0 for U_P = N_2.
        let c = ctx(3, 1, 2, false);
        let gl = c.gl(2, 1).unwrap();
        let nn = c.nn(2, 1).unwrap();
        for pi in cuspidals(&c, 1, 2) {
            for g in gl.iter() {
                let mut s = crate::scalar::Kahan::new();
                for u in nn.iter() {
                    s.add(pi.char_value(&c, &g.mul(&c.t, u)));
                }
                assert!(approx_eq(s.value(), C::new(0.0, 0.0), 1e-7));
            }
        }
    }

    #[test]
    fn cuspidality_all_parabolics_n3() {
        // (n,q) = (3,2): unipotent radicals of the standard parabolics
        // (2,1), (1,2), and (1,1,1).
        let c = ctx(2, 1, 3, false);
        let gl = c.gl(3, 1).unwrap();
        let radicals: Vec<Vec<Mat>> = vec![
            // type (2,1): u_{13}, u_{23} free
            {
                let mut v = Vec::new();
                for a in c.t.field_elements(1) {
                    for b in c.t.field_elements(1) {
                        let mut u = Mat::identity(3, 1);
                        u.set(0, 2, a);
                        u.set(1, 2, b);
                        v.push(u);
                    }
                }
                v
            },
            // type (1,2): u_{12}, u_{13} free
            {
                let mut v = Vec::new();
                for a in c.t.field_elements(1) {
                    for b in c.t.field_elements(1) {
                        let mut u = Mat::identity(3, 1);
                        u.set(0, 1, a);
                        u.set(0, 2, b);
                        v.push(u);
                    }
                }
                v
            },
            // Borel: all of N_3
            c.nn(3, 1).unwrap().to_vec(),
        ];
        for pi in cuspidals(&c, 1, 3) {
            for rad in &radicals {
                for g in gl.iter() {
                    let mut s = crate::scalar::Kahan::new();
                    for u in rad {
                        s.add(pi.char_value(&c, &g.mul(&c.t, u)));
                    }
                    assert!(approx_eq(s.value(), C::new(0.0, 0.0), 1e-7));
                }
            }
        }
    }

    #[test]
    fn regular_elliptic_value_gl2() {
        // χ(g) = −(α(x) + α(x^q)) when g has irreducible char poly with root x.
        let c = ctx(3, 1, 2, false);
        let gl = c.gl(2, 1).unwrap();
        for pi in cuspidals(&c, 1, 2) {
            for g in gl.iter() {
                if let ClassData::Primary {
                    deg_f: 2, root, ..
                } = c.class_data(g)
                {
                    let expect = -(pi.alpha.eval(&c.t, root)
                        + pi.alpha.eval(&c.t, c.t.pow(root, c.t.q)));
                    assert!(approx_eq(pi.char_value(&c, g), expect, TOL));
                }
            }
        }
    }

    #[test]
    fn root_choice_independence() {
        // Replacing the stored root by any other root of f leaves the
        // character value unchanged (the Galois sum is symmetric).
        let c = ctx(3, 1, 2, false);
        let gl = c.gl(2, 1).unwrap();
        let pi = &cuspidals(&c, 1, 2)[0];
        for g in gl.iter() {
            if let ClassData::Primary {
                f, deg_f, m, k, root,
            } = c.class_data(g)
            {
                let others: Vec<El> = (0..c.t.unit_order(2))
                    .map(|j| c.t.from_local(2, j))
                    .filter(|&x| crate::matgrp::poly_eval(&c.t, &f, x).is_none())
                    .collect();
                assert_eq!(others.len(), deg_f);
                let base = pi.value_of_class(&c, &ClassData::Primary {
                    f: f.clone(),
                    deg_f,
                    m,
                    k,
                    root,
                });
                for x in others {
                    // Evaluate the closed formula directly with root x.
                    let mut galois = C::new(0.0, 0.0);
                    let mut y = x;
                    for _ in 0..deg_f {
                        galois += pi.alpha.eval(&c.t, y);
                        y = c.t.pow(y, c.t.q);
                    }
                    let mut coeff = if pi.n % 2 == 0 { -1.0 } else { 1.0 };
                    for i in 1..k {
                        coeff *= 1.0 - (c.t.q as f64).powi((deg_f * i) as i32);
                    }
                    assert!(approx_eq(coeff * galois, base, TOL));
                }
            }
        }
    }

    #[test]
    fn whittaker_normalization_and_bessel_identity() {
        for (p, n) in [(3u64, 2u32), (2, 3)] {
            let c = ctx(p, 1, n, false);
            let psi = NChar::Abs(AddChar::canonical(&c.t, 1));
            for pi in cuspidals(&c, 1, n) {
                let b = Bessel::new(&pi, psi);
                let v = b.value(&c, &Mat::identity(n as usize, 1));
                assert!(approx_eq(v, C::new(1.0, 0.0), TOL), "B(1) = {v} ≠ 1");
            }
        }
    }

    #[test]
    fn bessel_equivariance_exhaustive_23() {
        let c = ctx(3, 1, 2, false);
        let psi_raw = AddChar::canonical(&c.t, 1);
        let psi = NChar::Abs(psi_raw);
        let nn = c.nn(2, 1).unwrap();
        let reps = c.coset_reps(2, 1).unwrap();
        for pi in cuspidals(&c, 1, 2) {
            let b = Bessel::new(&pi, psi);
            for g in reps.reps.iter() {
                let bg = b.value(&c, g);
                for u1 in nn.iter() {
                    for u2 in nn.iter() {
                        let m = u1.mul(&c.t, g).mul(&c.t, u2);
                        let expect = psi.eval_n(&c.t, u1) * psi.eval_n(&c.t, u2) * bg;
                        assert!(approx_eq(b.value(&c, &m), expect, TOL));
                    }
                }
            }
        }
    }

    #[test]
    fn bessel_inverse_conjugation_gl2_f3() {
        let c = ctx(3, 1, 2, false);
        let psi = NChar::Abs(AddChar::canonical(&c.t, 1));
        let gl = c.gl(2, 1).unwrap();
        for pi in cuspidals(&c, 1, 2) {
            let b = Bessel::new(&pi, psi);
            for g in gl.iter() {
                let gi = g.inverse(&c.t).unwrap();
                assert!(approx_eq(b.value(&c, &gi), b.value(&c, g).conj(), TOL));
            }
        }
    }

    #[test]
    fn central_values_match_omega() {
        let c = ctx(3, 1, 2, false);
        let psi = NChar::Abs(AddChar::canonical(&c.t, 1));
        for pi in cuspidals(&c, 1, 2) {
            let b = Bessel::new(&pi, psi);
            for j in 0..c.t.unit_order(1) {
                let a = c.t.from_local(1, j);
                let m = Mat::scalar(2, 1, a);
                assert!(approx_eq(
                    b.value(&c, &m),
                    pi.central_character(&c, a),
                    TOL
                ));
            }
        }
    }

    #[test]
    fn schur_multiplicity_on_diagonal_pair() {
        let c = ctx(3, 1, 2, false);
        let pis = cuspidals(&c, 1, 2);
        for p1 in &pis {
            for p2 in &pis {
                let mult = period_multiplicity(
                    &c,
                    &RepInput::Pair(p1, p2),
                    Subgroup::DiagPair,
                    &SubgroupChar::Trivial,
                )
                .unwrap();
                let dual = p1.isomorphic(&c.t, &p2.dual(&c.t));
                assert_eq!(mult, dual as u64, "Schur orthogonality");
            }
        }
    }

    #[test]
    fn galois_period_vanishes_in_even_rank() {
        // FR multiplicity 0 for every cuspidal of GL_2(E), q = 2.
        let c = ctx(2, 1, 2, true);
        for pi in cuspidals(&c, 2, 2) {
            let mult = period_multiplicity(
                &c,
                &RepInput::Single(&pi),
                Subgroup::GaloisF,
                &SubgroupChar::Trivial,
            )
            .unwrap();
            assert_eq!(mult, 0);
        }
    }

    #[test]
    fn mirabolic_multiplicity_at_most_one() {
        for (p, n) in [(3u64, 2u32), (2, 3)] {
            let c = ctx(p, 1, n, false);
            for pi in cuspidals(&c, 1, n) {
                let mult = period_multiplicity(
                    &c,
                    &RepInput::Single(&pi),
                    Subgroup::Mirabolic,
                    &SubgroupChar::Trivial,
                )
                .unwrap();
                assert!(mult <= 1, "mirabolic multiplicity must be ≤ 1");
            }
        }
    }

    #[test]
    fn omega_trivial_detection_matches_enumeration() {
        let c = ctx(3, 1, 2, false);
        for pi in cuspidals(&c, 1, 2) {
            let exact = pi.omega_trivial_on_f(&c.t);
            let numeric = (0..c.t.unit_order(1)).all(|j| {
                approx_eq(
                    pi.central_character(&c, c.t.from_local(1, j)),
                    C::new(1.0, 0.0),
                    TOL,
                )
            });
            assert_eq!(exact, numeric);
        }
    }
}
