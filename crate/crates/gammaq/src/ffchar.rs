//! Finite-field towers, additive and multiplicative characters, Gauss sums.
//!
//! A [`FieldTower`] realizes the chain F_p ⊂ F_q ⊂ F_{q^d} ⊂ ... ⊂ F_{q^N}
//! (N = n, or 2n in Asai mode) inside a single top field F_{q^N} built from a
//! deterministic defining polynomial. Elements are discrete-log indices with
//! respect to a fixed generator `g` of the top multiplicative group; the
//! subfield F_{q^d} is exactly the set of indices divisible by the cofactor
//! (q^N−1)/(q^d−1), so subfield embeddings are the identity on indices and
//! automatically compatible across the tower. Addition uses a Zech-logarithm
//! table; multiplication is index addition.

use crate::scalar::C;
use crate::{Error, Result};
use std::f64::consts::TAU;

/// A field element: `None` is zero, `Some(i)` is g^i in the top field.
pub type El = Option<u64>;

/// Additive zero.
pub const ZERO: El = None;
/// Multiplicative one (g^0).
pub const ONE: El = Some(0);

/// Encode an element as a single u64 for hashing/serialization (zero maps to
/// `u64::MAX`, which is never a valid index at desk scale).
pub fn el_key(x: El) -> u64 {
    x.unwrap_or(u64::MAX)
}

/// Inverse of [`el_key`].
pub fn el_from_key(k: u64) -> El {
    if k == u64::MAX {
        None
    } else {
        Some(k)
    }
}

/// An element tagged with the tower degree it lives in, exposed at API
/// boundaries. `value` is the discrete-log index with respect to the
/// canonical generator g_d of F_{q^d}^×, reduced modulo q^d − 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fx {
    pub degree: u32,
    pub value: El,
}

/// Default cap on the top-field order p^{kN} (log-table size).
pub const DEFAULT_BUDGET: u64 = 1 << 22;

const NONE32: u32 = u32::MAX;

/// Per-degree tables of a tower level.
#[derive(Debug)]
struct DegData {
    d: u32,
    /// q^d − 1.
    ord: u64,
    /// (q^N − 1)/(q^d − 1); subfield index cofactor.
    cof: u64,
    /// zeta[j] = exp(2πi·j/(q^d−1)), one table per modulus.
    zeta: Vec<C>,
}

/// A compatible system of finite fields F_{q^d} for the degrees required by
/// rank-n computations (and their quadratic extensions in Asai mode).
#[derive(Debug)]
pub struct FieldTower {
    pub p: u64,
    pub k: u32,
    /// q = p^k.
    pub q: u64,
    /// Rank parameter the tower was built for.
    pub n: u32,
    pub asai: bool,
    /// Top extension degree over F_q (n, or 2n in Asai mode).
    pub top: u32,
    /// q^top − 1.
    pub ord: u64,
    /// Extension degrees over F_q present in the tower, sorted.
    pub degrees: Vec<u32>,
    /// Defining polynomial of the top field over F_p, monic, low-to-high.
    pub poly: Vec<u8>,
    /// zech[i] = log(1 + g^i), NONE32 when 1 + g^i = 0.
    zech: Vec<u32>,
    /// Index shift realizing negation: log(−1) (0 in characteristic 2).
    neg_shift: u64,
    /// const_log[c] = log of the prime-field constant c, for c in 1..p.
    const_log: Vec<u64>,
    deg: Vec<DegData>,
    /// psi_roots[t] = exp(2πi·t/p).
    psi_roots: Vec<C>,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            out.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

fn divisors(n: u32) -> Vec<u32> {
    let mut out: Vec<u32> = (1..=n).filter(|d| n % d == 0).collect();
    out.sort_unstable();
    out
}

// --- dense polynomial arithmetic over F_p, used only during construction ---

type PPoly = Vec<u8>;

fn pp_trim(a: &mut PPoly) {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
}

fn pp_mul(a: &[u8], b: &[u8], p: u64) -> PPoly {
    let mut out = vec![0u8; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = (((out[i + j] as u64) + (ai as u64) * (bj as u64)) % p) as u8;
        }
    }
    pp_trim(&mut out);
    out
}

fn pp_rem(a: &[u8], m: &[u8], p: u64) -> PPoly {
    let mut r: Vec<u8> = a.to_vec();
    let dm = m.len() - 1;
    let lead_inv = mod_inv(*m.last().unwrap() as u64, p);
    while r.len() > dm {
        let c = *r.last().unwrap() as u64;
        if c != 0 {
            let f = (c * lead_inv) % p;
            let shift = r.len() - 1 - dm;
            for (i, &mi) in m.iter().enumerate() {
                let idx = shift + i;
                let sub = (f * (mi as u64)) % p;
                r[idx] = (((r[idx] as u64) + p - sub) % p) as u8;
            }
        }
        r.pop();
        pp_trim(&mut r);
        if r.len() <= dm {
            break;
        }
    }
    pp_trim(&mut r);
    r
}

fn pp_powmod(base: &[u8], mut e: u64, m: &[u8], p: u64) -> PPoly {
    let mut result: PPoly = vec![1];
    let mut b = pp_rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            result = pp_rem(&pp_mul(&result, &b, p), m, p);
        }
        b = pp_rem(&pp_mul(&b, &b, p), m, p);
        e >>= 1;
    }
    result
}

fn pp_is_one(a: &[u8]) -> bool {
    a.len() == 1 && a[0] == 1
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // p is a small prime; Fermat.
    let mut result = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    result
}

/// True when x has exact multiplicative order p^M − 1 in F_p[x]/(f); this
/// forces f irreducible and primitive simultaneously.
fn is_primitive_defining(f: &[u8], p: u64, order: u64) -> bool {
    if f[0] == 0 {
        return false;
    }
    let x: PPoly = vec![0, 1];
    if !pp_is_one(&pp_powmod(&x, order, f, p)) {
        return false;
    }
    for r in prime_factors(order) {
        if pp_is_one(&pp_powmod(&x, order / r, f, p)) {
            return false;
        }
    }
    true
}

/// The lexicographically least primitive polynomial of degree `m_abs` over
/// F_p, ordered by the base-p integer encoding of the non-leading
/// coefficients (constant term least significant).
fn least_primitive_poly(p: u64, m_abs: u32, order: u64) -> Vec<u8> {
    let pm = order + 1;
    let mut code = 0u64;
    loop {
        assert!(code < pm, "no primitive polynomial found (impossible)");
        let mut f = vec![0u8; m_abs as usize + 1];
        let mut c = code;
        for fi in f.iter_mut().take(m_abs as usize) {
            *fi = (c % p) as u8;
            c /= p;
        }
        f[m_abs as usize] = 1;
        if is_primitive_defining(&f, p, order) {
            return f;
        }
        code += 1;
    }
}

impl FieldTower {
    /// Build the tower for parameters (p, k, n), with Asai-mode quadratic
    /// levels when requested, under the default table budget.
    pub fn build(p: u64, k: u32, n: u32, asai: bool) -> Result<FieldTower> {
        Self::build_with_budget(p, k, n, asai, DEFAULT_BUDGET)
    }

    /// As [`FieldTower::build`] with an explicit cap on the top-field order.
    pub fn build_with_budget(p: u64, k: u32, n: u32, asai: bool, budget: u64) -> Result<FieldTower> {
        if !is_prime(p) {
            return Err(Error::Config(format!("p = {p} is not prime")));
        }
        if k == 0 || n == 0 {
            return Err(Error::Config("k and n must be positive".into()));
        }
        let top = if asai { 2 * n } else { n };
        let m_abs = k
            .checked_mul(top)
            .ok_or_else(|| Error::Config("degree overflow".into()))?;
        let mut pm: u64 = 1;
        for _ in 0..m_abs {
            pm = pm
                .checked_mul(p)
                .filter(|&v| v <= budget)
                .ok_or_else(|| Error::Budget(format!("p^(k*{top}) exceeds budget {budget}")))?;
        }
        let ord = pm - 1;
        let q = p.pow(k);

        let poly = least_primitive_poly(p, m_abs, ord);

        // Discrete-log table over the packed base-p encoding of elements.
        let mut log = vec![NONE32; pm as usize];
        let mut exp = vec![0u64; ord as usize];
        let mut cur = vec![0u8; m_abs as usize];
        cur[0] = 1;
        for i in 0..ord {
            let packed: u64 = cur
                .iter()
                .rev()
                .fold(0u64, |acc, &c| acc * p + c as u64);
            debug_assert_eq!(log[packed as usize], NONE32, "generator order defect");
            log[packed as usize] = i as u32;
            exp[i as usize] = packed;
            // Multiply by x modulo the defining polynomial.
            let carry = cur[m_abs as usize - 1];
            for j in (1..m_abs as usize).rev() {
                cur[j] = cur[j - 1];
            }
            cur[0] = 0;
            if carry != 0 {
                for j in 0..m_abs as usize {
                    let sub = (carry as u64) * (poly[j] as u64) % p;
                    cur[j] = (((cur[j] as u64) + p - sub) % p) as u8;
                }
            }
        }

        let zech: Vec<u32> = (0..ord as usize)
            .map(|i| {
                let packed = exp[i];
                let d0 = packed % p;
                let bumped = packed - d0 + (d0 + 1) % p;
                if bumped == 0 {
                    NONE32
                } else {
                    log[bumped as usize]
                }
            })
            .collect();

        let mut const_log = vec![0u64; p as usize];
        for c in 1..p {
            const_log[c as usize] = log[c as usize] as u64;
        }

        let mut degrees: Vec<u32> = divisors(n);
        if asai {
            for d in divisors(n) {
                degrees.push(2 * d);
            }
        }
        degrees.sort_unstable();
        degrees.dedup();

        let deg = degrees
            .iter()
            .map(|&d| {
                let ord_d = q.pow(d) - 1;
                let zeta = (0..ord_d)
                    .map(|j| C::from_polar(1.0, TAU * j as f64 / ord_d as f64))
                    .collect();
                DegData {
                    d,
                    ord: ord_d,
                    cof: ord / ord_d,
                    zeta,
                }
            })
            .collect();

        let psi_roots = (0..p)
            .map(|t| C::from_polar(1.0, TAU * t as f64 / p as f64))
            .collect();

        Ok(FieldTower {
            p,
            k,
            q,
            n,
            asai,
            top,
            ord,
            degrees,
            poly,
            zech,
            neg_shift: if p == 2 { 0 } else { ord / 2 },
            const_log,
            deg,
            psi_roots,
        })
    }

    fn deg_data(&self, d: u32) -> &DegData {
        self.deg
            .iter()
            .find(|dd| dd.d == d)
            .unwrap_or_else(|| panic!("degree {d} not in tower {:?}", self.degrees))
    }

    /// True when degree d was built.
    pub fn has_degree(&self, d: u32) -> bool {
        self.degrees.contains(&d)
    }

    /// |F_{q^d}^×| = q^d − 1.
    pub fn unit_order(&self, d: u32) -> u64 {
        self.deg_data(d).ord
    }

    /// exp(2πi·j/(q^d−1)) from the per-modulus table.
    pub fn zeta(&self, d: u32, j: u64) -> C {
        let dd = self.deg_data(d);
        dd.zeta[(j % dd.ord) as usize]
    }

    /// exp(2πi·t/p).
    pub fn psi_root(&self, t: u64) -> C {
        self.psi_roots[(t % self.p) as usize]
    }

    // --- element arithmetic (top-field representation) ---

    /// The prime-field constant c as a tower element.
    pub fn constant(&self, c: u64) -> El {
        let c = c % self.p;
        if c == 0 {
            None
        } else {
            Some(self.const_log[c as usize])
        }
    }

    /// Constant value of an element known to lie in F_p; None input is 0.
    pub fn constant_value(&self, x: El) -> u64 {
        match x {
            None => 0,
            Some(i) => {
                for c in 1..self.p {
                    if self.const_log[c as usize] == i {
                        return c;
                    }
                }
                panic!("element g^{i} is not a prime-field constant");
            }
        }
    }

    pub fn add(&self, a: El, b: El) -> El {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(i), Some(j)) => {
                let diff = (j + self.ord - i) % self.ord;
                match self.zech[diff as usize] {
                    NONE32 => None,
                    z => Some((i + z as u64) % self.ord),
                }
            }
        }
    }

    pub fn neg(&self, a: El) -> El {
        a.map(|i| (i + self.neg_shift) % self.ord)
    }

    pub fn sub(&self, a: El, b: El) -> El {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: El, b: El) -> El {
        match (a, b) {
            (Some(i), Some(j)) => Some((i + j) % self.ord),
            _ => None,
        }
    }

    /// Multiplicative inverse; None for zero input.
    pub fn inv(&self, a: El) -> El {
        a.map(|i| (self.ord - i) % self.ord)
    }

    /// a^e with 0^0 = 1.
    pub fn pow(&self, a: El, e: u64) -> El {
        match a {
            None => {
                if e == 0 {
                    ONE
                } else {
                    None
                }
            }
            Some(i) => {
                Some(((i as u128 * (e % self.ord) as u128) % self.ord as u128) as u64)
            }
        }
    }

    /// Frobenius x ↦ x^{q^d}.
    pub fn frob(&self, a: El, d: u32) -> El {
        self.pow(a, self.q.pow(d))
    }

    /// True when x lies in the subfield F_{q^d}.
    pub fn in_subfield(&self, a: El, d: u32) -> bool {
        match a {
            None => true,
            Some(i) => i % self.deg_data(d).cof == 0,
        }
    }

    /// Discrete-log index of x with respect to the canonical generator
    /// g_d = g^{cof(d)} of F_{q^d}^×. Panics when x is outside the subfield.
    pub fn local_index(&self, a: El, d: u32) -> Option<u64> {
        a.map(|i| {
            let cof = self.deg_data(d).cof;
            assert_eq!(i % cof, 0, "element not in F_q^{d}");
            i / cof
        })
    }

    /// The element g_d^j of F_{q^d}.
    pub fn from_local(&self, d: u32, j: u64) -> El {
        let dd = self.deg_data(d);
        Some((j % dd.ord) * dd.cof)
    }

    /// Tag an element with its degree for the public [`Fx`] view.
    pub fn to_fx(&self, a: El, d: u32) -> Fx {
        Fx {
            degree: d,
            value: self.local_index(a, d),
        }
    }

    /// Untag an [`Fx`] back into the internal representation.
    pub fn from_fx(&self, x: Fx) -> El {
        match x.value {
            None => None,
            Some(j) => self.from_local(x.degree, j),
        }
    }

    /// All elements of F_{q^d} in canonical order: 0, g_d^0, g_d^1, ...
    pub fn field_elements(&self, d: u32) -> Vec<El> {
        let mut out = Vec::with_capacity(self.deg_data(d).ord as usize + 1);
        out.push(None);
        for j in 0..self.deg_data(d).ord {
            out.push(self.from_local(d, j));
        }
        out
    }

    /// Tr_{F_{q^{d_from}}/F_{q^{d_to}}}(x) = Σ x^{(q^{d_to})^i}.
    pub fn trace(&self, a: El, d_from: u32, d_to: u32) -> El {
        assert!(d_from % d_to == 0, "trace degrees must be nested");
        let r = d_from / d_to;
        let step = self.q.pow(d_to);
        let mut acc = None;
        let mut x = a;
        for _ in 0..r {
            acc = self.add(acc, x);
            x = self.pow(x, step);
        }
        debug_assert!(self.in_subfield(acc, d_to));
        acc
    }

    /// Norm to the subfield: ∏ x^{(q^{d_to})^i}.
    pub fn norm(&self, a: El, d_from: u32, d_to: u32) -> El {
        assert!(d_from % d_to == 0);
        let r = d_from / d_to;
        let step = self.q.pow(d_to);
        let mut acc = ONE;
        let mut x = a;
        for _ in 0..r {
            acc = self.mul(acc, x);
            x = self.pow(x, step);
        }
        acc
    }

    /// Absolute trace to F_p of an element of F_{q^d}, as an integer in [0,p).
    pub fn abs_trace_int(&self, a: El, d: u32) -> u64 {
        let terms = (self.k * d) as u64;
        let mut acc = None;
        let mut x = a;
        for _ in 0..terms {
            acc = self.add(acc, x);
            x = self.pow(x, self.p);
        }
        self.constant_value(acc)
    }
}

/// An additive character ψ_a of F_{q^d}: x ↦ exp(2πi·AbsTr(a·x)/p),
/// conjugated when `inverse` is set.
#[derive(Clone, Copy, Debug)]
pub struct AddChar {
    pub degree: u32,
    pub twist: El,
    pub inverse: bool,
}

impl AddChar {
    pub fn new(tower: &FieldTower, degree: u32, twist: El, inverse: bool) -> Result<AddChar> {
        if !tower.has_degree(degree) {
            return Err(Error::Config(format!("degree {degree} not in tower")));
        }
        if twist.is_none() {
            return Err(Error::Config("additive-character twist must be nonzero".into()));
        }
        if !tower.in_subfield(twist, degree) {
            return Err(Error::Config("twist outside the stated subfield".into()));
        }
        Ok(AddChar {
            degree,
            twist,
            inverse,
        })
    }

    /// The canonical untwisted ψ at the given degree.
    pub fn canonical(tower: &FieldTower, degree: u32) -> AddChar {
        AddChar::new(tower, degree, ONE, false).expect("canonical character")
    }

    pub fn conj(&self) -> AddChar {
        AddChar {
            inverse: !self.inverse,
            ..*self
        }
    }

    /// The trace-compatible extension ψ_d = ψ ∘ Tr to a larger tower degree
    /// (the twist embeds along the inclusion, which is the identity on
    /// indices).
    pub fn at_degree(&self, tower: &FieldTower, degree: u32) -> AddChar {
        assert!(degree % self.degree == 0, "extension degree must be a multiple");
        AddChar::new(tower, degree, self.twist, self.inverse).expect("compatible degree")
    }

    pub fn eval(&self, tower: &FieldTower, x: El) -> C {
        debug_assert!(tower.in_subfield(x, self.degree));
        let t = tower.abs_trace_int(tower.mul(self.twist, x), self.degree);
        let v = tower.psi_root(t);
        if self.inverse {
            v.conj()
        } else {
            v
        }
    }
}

/// ψ_{E/F}(x) = ψ(Tr_{E/F}(Δ·x)) with Δ a nonzero trace-zero element of E;
/// restricts trivially to F.
#[derive(Clone, Copy, Debug)]
pub struct RelChar {
    pub delta: El,
    /// The underlying ψ of F_q (degree-1 additive character).
    pub base: AddChar,
}

impl RelChar {
    pub fn new(tower: &FieldTower, delta: El, base: AddChar) -> Result<RelChar> {
        if delta.is_none() {
            return Err(Error::Config("Δ must be nonzero".into()));
        }
        if base.degree != 1 {
            return Err(Error::Config("relative character needs a degree-1 base ψ".into()));
        }
        if !tower.in_subfield(delta, 2) {
            return Err(Error::Config("Δ must lie in E = F_{q^2}".into()));
        }
        if tower.trace(delta, 2, 1).is_some() {
            return Err(Error::Config("Δ must have trace zero".into()));
        }
        Ok(RelChar { delta, base })
    }

    pub fn conj(&self) -> RelChar {
        RelChar {
            delta: self.delta,
            base: self.base.conj(),
        }
    }

    pub fn eval(&self, tower: &FieldTower, x: El) -> C {
        debug_assert!(tower.in_subfield(x, 2));
        let y = tower.trace(tower.mul(self.delta, x), 2, 1);
        self.base.eval(tower, y)
    }
}

/// The trace-zero element of E^× with least discrete-log index.
pub fn find_delta(tower: &FieldTower) -> El {
    for j in 0..tower.unit_order(2) {
        let x = tower.from_local(2, j);
        if tower.trace(x, 2, 1).is_none() {
            return x;
        }
    }
    unreachable!("E always contains a nonzero trace-zero element")
}

/// A multiplicative character of F_{q^d}^×, encoded by its exponent:
/// χ(g_d^j) = ζ_{q^d−1}^{e·j}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MultChar {
    pub degree: u32,
    pub exponent: u64,
}

impl MultChar {
    pub fn new(tower: &FieldTower, degree: u32, exponent: u64) -> Result<MultChar> {
        if !tower.has_degree(degree) {
            return Err(Error::Config(format!("degree {degree} not in tower")));
        }
        Ok(MultChar {
            degree,
            exponent: exponent % tower.unit_order(degree),
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.exponent == 0
    }

    /// χ ↦ χ^{-1} (= complex conjugate on values).
    pub fn inverse(&self, tower: &FieldTower) -> MultChar {
        let m = tower.unit_order(self.degree);
        MultChar {
            degree: self.degree,
            exponent: (m - self.exponent % m) % m,
        }
    }

    /// χ ↦ χ^{q^s}.
    pub fn frobenius(&self, tower: &FieldTower, s: u32) -> MultChar {
        let m = tower.unit_order(self.degree);
        MultChar {
            degree: self.degree,
            exponent: ((self.exponent as u128 * tower.q.pow(s) as u128) % m as u128) as u64,
        }
    }

    /// Size of the Frobenius orbit of the exponent under e ↦ e·q^{step}.
    pub fn orbit_size(&self, tower: &FieldTower, step: u32) -> u32 {
        let m = tower.unit_order(self.degree) as u128;
        let mul = tower.q.pow(step) as u128;
        let mut e = self.exponent as u128;
        let mut s = 0;
        loop {
            e = e * mul % m;
            s += 1;
            if e == self.exponent as u128 {
                return s;
            }
        }
    }

    /// Regularity of a character of F_{q^{d·n}} over the base F_{q^d}: the
    /// Frobenius orbit {e, e·q^d, ...} has exactly n elements.
    pub fn is_regular_over(&self, tower: &FieldTower, base_degree: u32) -> bool {
        assert!(self.degree % base_degree == 0);
        self.orbit_size(tower, base_degree) == self.degree / base_degree
    }

    pub fn eval(&self, tower: &FieldTower, x: El) -> C {
        let j = tower
            .local_index(x, self.degree)
            .expect("multiplicative character undefined at 0");
        let m = tower.unit_order(self.degree);
        tower.zeta(
            self.degree,
            ((self.exponent as u128 * j as u128) % m as u128) as u64,
        )
    }

    /// Descend along the norm map: for χ fixed by Frobenius^d (d | degree),
    /// the unique character χ_d of F_{q^d}^× with χ_d ∘ N = χ.
    pub fn norm_descend(&self, tower: &FieldTower, d: u32) -> MultChar {
        assert!(self.degree % d == 0);
        let big = tower.unit_order(self.degree);
        let small = tower.unit_order(d);
        let m = big / small;
        let e = self.exponent % big;
        assert_eq!(e % m, 0, "character is not Frobenius^{d}-stable");
        MultChar {
            degree: d,
            exponent: e / m,
        }
    }
}

/// One representative (minimal exponent) per size-n Frobenius orbit of
/// characters of F_{q^{base_degree·n}}^× over F_{q^{base_degree}}, sorted.
/// These index the cuspidal representations of GL_n(F_{q^{base_degree}}).
pub fn regular_classes(tower: &FieldTower, base_degree: u32, n: u32) -> Vec<MultChar> {
    let degree = base_degree * n;
    let m = tower.unit_order(degree) as u128;
    let mul = tower.q.pow(base_degree) as u128;
    let mut out = Vec::new();
    for e in 0..m {
        let mut x = e;
        let mut size = 0u32;
        let mut minimal = true;
        loop {
            x = x * mul % m;
            size += 1;
            if x < e {
                minimal = false;
            }
            if x == e {
                break;
            }
        }
        if minimal && size == n {
            out.push(MultChar {
                degree,
                exponent: e as u64,
            });
        }
    }
    out
}

/// Gauss sum τ(χ, ψ) = −Σ_{x ∈ F_{q^d}^×} χ^{-1}(x)·ψ(x) at the common
/// degree of χ and ψ.
pub fn gauss_sum(tower: &FieldTower, chi: &MultChar, psi: &AddChar) -> C {
    assert_eq!(chi.degree, psi.degree, "character degrees must match");
    let d = chi.degree;
    let m = tower.unit_order(d);
    let e_inv = (m - chi.exponent % m) % m;
    let s = crate::par::sum_indexed(m as usize, |j| {
        let j = j as u64;
        let x = tower.from_local(d, j);
        tower.zeta(d, ((e_inv as u128 * j as u128) % m as u128) as u64) * psi.eval(tower, x)
    });
    -s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{approx_eq, C, TOL};

    #[test]
    fn build_small_towers() {
        let t = FieldTower::build(2, 1, 2, false).unwrap();
        assert_eq!(t.q, 2);
        assert_eq!(t.ord, 3);
        assert_eq!(t.degrees, vec![1, 2]);
        assert_eq!(t.unit_order(1), 1);
        assert_eq!(t.unit_order(2), 3);

        let t = FieldTower::build(3, 1, 2, false).unwrap();
        assert_eq!(t.ord, 8);
        assert_eq!(t.unit_order(2), 8);
        assert_eq!(t.unit_order(1), 2);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(FieldTower::build(4, 1, 2, false), Err(Error::Config(_))));
        assert!(matches!(
            FieldTower::build_with_budget(2, 1, 30, false, 1 << 20),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn field_axioms_exhaustive_f9() {
        let t = FieldTower::build(3, 1, 2, false).unwrap();
        let elems = t.field_elements(2);
        assert_eq!(elems.len(), 9);
        for &a in &elems {
            // additive inverse
            assert_eq!(t.add(a, t.neg(a)), None);
            if a.is_some() {
                assert_eq!(t.mul(a, t.inv(a)), ONE);
            }
            for &b in &elems {
                assert_eq!(t.add(a, b), t.add(b, a));
                for &c in &elems {
                    assert_eq!(t.add(t.add(a, b), c), t.add(a, t.add(b, c)));
                    assert_eq!(
                        t.mul(a, t.add(b, c)),
                        t.add(t.mul(a, b), t.mul(a, c)),
                        "distributivity"
                    );
                }
            }
        }
    }

    #[test]
    fn zech_identity() {
        let t = FieldTower::build(2, 1, 4, false).unwrap();
        // 1 + g^i computed through generic addition must agree with direct
        // addition of ONE.
        for i in 0..t.ord {
            let gi = Some(i);
            let via_add = t.add(ONE, gi);
            let via_sub = t.sub(via_add, gi);
            assert_eq!(via_sub, ONE);
        }
    }

    #[test]
    fn subfield_structure_f16() {
        let t = FieldTower::build(2, 1, 2, true).unwrap();
        assert_eq!(t.top, 4);
        assert_eq!(t.degrees, vec![1, 2, 4]);
        // F_4 inside F_16: indices divisible by 5.
        let f4: Vec<El> = t.field_elements(2);
        assert_eq!(f4.len(), 4);
        for &x in &f4 {
            assert!(t.in_subfield(x, 2));
            // Closed under addition and multiplication.
            for &y in &f4 {
                assert!(t.in_subfield(t.add(x, y), 2));
                assert!(t.in_subfield(t.mul(x, y), 2));
            }
        }
    }

    #[test]
    fn trace_transitivity_f16() {
        // Tr_{F16/F2} = Tr_{F4/F2} ∘ Tr_{F16/F4}, all 16 elements.
        let t = FieldTower::build(2, 1, 2, true).unwrap();
        for x in t.field_elements(4) {
            let direct = t.trace(x, 4, 1);
            let staged = t.trace(t.trace(x, 4, 2), 2, 1);
            assert_eq!(direct, staged);
        }
    }

    #[test]
    fn trace_basics() {
        let t = FieldTower::build(2, 1, 2, false).unwrap();
        assert_eq!(t.trace(None, 2, 1), None);
        // Tr(ω) = ω + ω² = 1 for a generator ω of F_4^×.
        let omega = t.from_local(2, 1);
        assert_eq!(t.trace(omega, 2, 1), ONE);
        // Subfield element: Tr(x) = r·x; over F_2 with r = 2 this is 0.
        assert_eq!(t.trace(ONE, 2, 1), None);
    }

    #[test]
    fn trace_of_subfield_element_is_r_times_x() {
        let t = FieldTower::build(3, 1, 2, false).unwrap();
        for x in t.field_elements(1) {
            let expect = t.mul(t.constant(2), x); // r = 2
            assert_eq!(t.trace(x, 2, 1), expect);
        }
    }

    #[test]
    fn add_char_values() {
        let t2 = FieldTower::build(2, 1, 1, false).unwrap();
        let psi = AddChar::canonical(&t2, 1);
        assert!(approx_eq(psi.eval(&t2, None), C::new(1.0, 0.0), TOL));
        assert!(approx_eq(psi.eval(&t2, ONE), C::new(-1.0, 0.0), TOL));

        let t3 = FieldTower::build(3, 1, 1, false).unwrap();
        let psi = AddChar::canonical(&t3, 1);
        let z3 = C::from_polar(1.0, std::f64::consts::TAU / 3.0);
        assert!(approx_eq(psi.eval(&t3, t3.constant(1)), z3, TOL));
        assert!(approx_eq(psi.eval(&t3, t3.constant(2)), z3 * z3, TOL));
    }

    #[test]
    fn add_char_is_additive_small_fields() {
        for (p, k, n) in [(2, 1, 2u32), (3, 1, 2), (2, 2, 2), (5, 1, 2), (7, 1, 2)] {
            let t = FieldTower::build(p, 1 * k, n, false).unwrap();
            if t.q.pow(n) > 64 {
                continue;
            }
            for &d in &t.degrees {
                let psi = AddChar::canonical(&t, d);
                let elems = t.field_elements(d);
                for &x in &elems {
                    for &y in &elems {
                        let lhs = psi.eval(&t, t.add(x, y));
                        let rhs = psi.eval(&t, x) * psi.eval(&t, y);
                        assert!(approx_eq(lhs, rhs, TOL));
                    }
                }
            }
        }
    }

    #[test]
    fn twisted_add_char_and_conjugate() {
        let t = FieldTower::build(3, 1, 2, false).unwrap();
        let a = t.constant(2);
        let psi_a = AddChar::new(&t, 1, a, false).unwrap();
        let psi = AddChar::canonical(&t, 1);
        for x in t.field_elements(1) {
            assert!(approx_eq(psi_a.eval(&t, x), psi.eval(&t, t.mul(a, x)), TOL));
            assert!(approx_eq(
                psi.conj().eval(&t, x),
                psi.eval(&t, x).conj(),
                TOL
            ));
        }
    }

    #[test]
    fn mult_char_values_and_multiplicativity() {
        let t = FieldTower::build(3, 1, 1, false).unwrap();
        let chi = MultChar::new(&t, 1, 1).unwrap();
        // 2 generates F_3^×; χ(2) = ζ_2 = −1.
        assert!(approx_eq(chi.eval(&t, t.constant(2)), C::new(-1.0, 0.0), TOL));
        assert!(approx_eq(chi.eval(&t, ONE), C::new(1.0, 0.0), TOL));

        let t = FieldTower::build(2, 1, 3, false).unwrap();
        for e in 0..t.unit_order(3) {
            let chi = MultChar::new(&t, 3, e).unwrap();
            for j1 in 0..t.unit_order(3) {
                for j2 in 0..t.unit_order(3) {
                    let x = t.from_local(3, j1);
                    let y = t.from_local(3, j2);
                    assert!(approx_eq(
                        chi.eval(&t, t.mul(x, y)),
                        chi.eval(&t, x) * chi.eval(&t, y),
                        TOL
                    ));
                }
            }
        }
    }

    #[test]
    fn regular_class_counts_match_necklace_formula() {
        // count = (1/n)·Σ_{d|n} μ(n/d)(q^d − 1)
        let cases = [
            (2u64, 1u32, 2u32, 1usize),
            (3, 1, 2, 3),
            (2, 2, 2, 6), // q=4: (16-4)/2
            (2, 1, 3, 2),
            (3, 1, 3, 8),
            (2, 1, 4, 3),
        ];
        for (p, k, n, expect) in cases {
            let t = FieldTower::build(p, k, n, false).unwrap();
            let classes = regular_classes(&t, 1, n);
            assert_eq!(classes.len(), expect, "(p,k,n)=({p},{k},{n})");
            for c in &classes {
                assert!(c.is_regular_over(&t, 1));
            }
        }
        // The unique class at (n,q)=(2,2) is exponent 1 with orbit {1,2}.
        let t = FieldTower::build(2, 1, 2, false).unwrap();
        let classes = regular_classes(&t, 1, 2);
        assert_eq!(classes[0].exponent, 1);
    }

    #[test]
    fn gauss_sum_trivial_character() {
        for (p, k) in [(2u64, 1u32), (3, 1), (2, 2)] {
            let t = FieldTower::build(p, k, 2, false).unwrap();
            for &d in &t.degrees {
                let chi = MultChar::new(&t, d, 0).unwrap();
                let psi = AddChar::canonical(&t, d);
                assert!(approx_eq(gauss_sum(&t, &chi, &psi), C::new(1.0, 0.0), TOL));
            }
        }
    }

    #[test]
    fn gauss_sum_f3_quadratic() {
        // τ(χ, ψ) = −(ζ_3 − ζ_3²) = −i√3 for the order-2 character of F_3^×.
        let t = FieldTower::build(3, 1, 1, false).unwrap();
        let chi = MultChar::new(&t, 1, 1).unwrap();
        let psi = AddChar::canonical(&t, 1);
        let tau = gauss_sum(&t, &chi, &psi);
        assert!(approx_eq(tau, C::new(0.0, -(3.0f64.sqrt())), TOL));
    }

    #[test]
    fn gauss_sum_absolute_values_and_frobenius_invariance() {
        for (p, k, n) in [(2u64, 1u32, 4u32), (3, 1, 2), (2, 2, 2), (3, 1, 3)] {
            let t = FieldTower::build(p, k, n, false).unwrap();
            for &d in &t.degrees {
                let psi = AddChar::canonical(&t, d);
                for e in 1..t.unit_order(d) {
                    let chi = MultChar::new(&t, d, e).unwrap();
                    let tau = gauss_sum(&t, &chi, &psi);
                    let qd2 = (t.q as f64).powf(d as f64 / 2.0);
                    assert!(
                        (tau.norm() - qd2).abs() < TOL,
                        "|τ| defect at q={}, d={d}, e={e}",
                        t.q
                    );
                    let tau_frob = gauss_sum(&t, &chi.frobenius(&t, 0).frobenius(&t, 0), &psi);
                    // χ^{q^0·q^0} = χ: sanity that frobenius composes.
                    assert!(approx_eq(tau, tau_frob, TOL));
                    let chi_q = MultChar::new(
                        &t,
                        d,
                        ((e as u128 * t.q as u128) % t.unit_order(d) as u128) as u64,
                    )
                    .unwrap();
                    assert!(approx_eq(tau, gauss_sum(&t, &chi_q, &psi), TOL));
                }
            }
        }
    }

    #[test]
    fn rel_char_restricts_trivially_to_f() {
        for (p, k) in [(2u64, 1u32), (3, 1)] {
            let t = FieldTower::build(p, k, 2, true).unwrap();
            let delta = find_delta(&t);
            assert!(t.trace(delta, 2, 1).is_none());
            let psi = AddChar::canonical(&t, 1);
            let rc = RelChar::new(&t, delta, psi).unwrap();
            for x in t.field_elements(1) {
                assert!(approx_eq(rc.eval(&t, x), C::new(1.0, 0.0), TOL));
            }
            assert!(approx_eq(rc.eval(&t, None), C::new(1.0, 0.0), TOL));
            // Nontrivial somewhere on E.
            let nontrivial = t
                .field_elements(2)
                .iter()
                .any(|&x| !approx_eq(rc.eval(&t, x), C::new(1.0, 0.0), TOL));
            assert!(nontrivial);
            // x = Δ^{-1}: value is ψ(Tr(1)) = ψ(2).
            let x = t.inv(delta);
            let expect = psi.eval(&t, t.trace(ONE, 2, 1));
            assert!(approx_eq(rc.eval(&t, x), expect, TOL));
        }
    }

    #[test]
    fn norm_descend_matches_restriction_through_norm() {
        let t = FieldTower::build(3, 1, 2, false).unwrap();
        // χ of F_9 fixed by Frobenius: exponents divisible by (q²−1)/(q−1)=4.
        for e in [0u64, 4] {
            let chi = MultChar::new(&t, 2, e).unwrap();
            let chi1 = chi.norm_descend(&t, 1);
            for j in 0..t.unit_order(2) {
                let x = t.from_local(2, j);
                let nx = t.norm(x, 2, 1);
                assert!(approx_eq(chi.eval(&t, x), chi1.eval(&t, nx), TOL));
            }
        }
    }

    #[test]
    fn fx_round_trip() {
        let t = FieldTower::build(3, 1, 2, false).unwrap();
        for &d in &t.degrees {
            for x in t.field_elements(d) {
                let fx = t.to_fx(x, d);
                assert_eq!(t.from_fx(fx), x);
            }
        }
    }
}
