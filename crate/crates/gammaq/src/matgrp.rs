//! Matrices over tower fields, subgroup enumeration, canonical coset
//! representatives of N_n\GL_n, special permutation matrices, and
//! conjugacy-class invariants feeding the cuspidal character.

use crate::ffchar::{el_key, El, FieldTower, ONE, ZERO};
use crate::{Error, Result};
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

/// Default cap on the number of matrices scanned in a single enumeration
/// (q^{n²} for a GL_n scan).
pub const DEFAULT_GROUP_BUDGET: u64 = 1 << 22;

/// Dense n×n matrix over F_{q^d}, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat {
    pub n: usize,
    pub d: u32,
    pub e: Vec<El>,
}

impl Mat {
    pub fn zero(n: usize, d: u32) -> Mat {
        Mat {
            n,
            d,
            e: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize, d: u32) -> Mat {
        let mut m = Mat::zero(n, d);
        for i in 0..n {
            m.e[i * n + i] = ONE;
        }
        m
    }

    /// a·1_n.
    pub fn scalar(n: usize, d: u32, a: El) -> Mat {
        let mut m = Mat::zero(n, d);
        for i in 0..n {
            m.e[i * n + i] = a;
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> El {
        self.e[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: El) {
        self.e[i * self.n + j] = v;
    }

    /// Canonical byte-identical key (used for memoization and caching).
    pub fn key(&self) -> Vec<u64> {
        self.e.iter().map(|&x| el_key(x)).collect()
    }

    pub fn mul(&self, t: &FieldTower, other: &Mat) -> Mat {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Mat::zero(n, self.d);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for l in 0..n {
                    acc = t.add(acc, t.mul(self.get(i, l), other.get(l, j)));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        let n = self.n;
        let mut out = Mat::zero(n, self.d);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, self.get(j, i));
            }
        }
        out
    }

    pub fn det(&self, t: &FieldTower) -> El {
        let n = self.n;
        let mut a = self.clone();
        let mut det = ONE;
        for col in 0..n {
            let pivot = (col..n).find(|&r| a.get(r, col).is_some());
            let Some(pr) = pivot else { return ZERO };
            if pr != col {
                for j in 0..n {
                    let tmp = a.get(col, j);
                    a.set(col, j, a.get(pr, j));
                    a.set(pr, j, tmp);
                }
                det = t.neg(det);
            }
            let pv = a.get(col, col);
            det = t.mul(det, pv);
            let pv_inv = t.inv(pv);
            for r in col + 1..n {
                let f = t.mul(a.get(r, col), pv_inv);
                if f.is_some() {
                    for j in col..n {
                        let v = t.sub(a.get(r, j), t.mul(f, a.get(col, j)));
                        a.set(r, j, v);
                    }
                }
            }
        }
        det
    }

    /// Gauss–Jordan inverse; None when singular.
    pub fn inverse(&self, t: &FieldTower) -> Option<Mat> {
        let n = self.n;
        let mut a = self.clone();
        let mut b = Mat::identity(n, self.d);
        for col in 0..n {
            let pr = (col..n).find(|&r| a.get(r, col).is_some())?;
            if pr != col {
                for j in 0..n {
                    let (x, y) = (a.get(col, j), a.get(pr, j));
                    a.set(col, j, y);
                    a.set(pr, j, x);
                    let (x, y) = (b.get(col, j), b.get(pr, j));
                    b.set(col, j, y);
                    b.set(pr, j, x);
                }
            }
            let pv_inv = t.inv(a.get(col, col));
            for j in 0..n {
                a.set(col, j, t.mul(a.get(col, j), pv_inv));
                b.set(col, j, t.mul(b.get(col, j), pv_inv));
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col);
                if f.is_some() {
                    for j in 0..n {
                        a.set(r, j, t.sub(a.get(r, j), t.mul(f, a.get(col, j))));
                        b.set(r, j, t.sub(b.get(r, j), t.mul(f, b.get(col, j))));
                    }
                }
            }
        }
        Some(b)
    }

    /// Rank over the field, by Gaussian elimination.
    pub fn rank(&self, t: &FieldTower) -> usize {
        let n = self.n;
        let mut a = self.clone();
        let mut rank = 0;
        for col in 0..n {
            if rank == n {
                break;
            }
            let Some(pr) = (rank..n).find(|&r| a.get(r, col).is_some()) else {
                continue;
            };
            if pr != rank {
                for j in 0..n {
                    let tmp = a.get(rank, j);
                    a.set(rank, j, a.get(pr, j));
                    a.set(pr, j, tmp);
                }
            }
            let pv_inv = t.inv(a.get(rank, col));
            for r in rank + 1..n {
                let f = t.mul(a.get(r, col), pv_inv);
                if f.is_some() {
                    for j in col..n {
                        a.set(r, j, t.sub(a.get(r, j), t.mul(f, a.get(rank, j))));
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn is_upper_unitriangular(&self, _t: &FieldTower) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let v = self.get(i, j);
                if i == j && v != ONE {
                    return false;
                }
                if i > j && v.is_some() {
                    return false;
                }
            }
        }
        true
    }

    /// Sum of the superdiagonal entries g_{1,2} + ... + g_{n−1,n} (the
    /// argument of the Whittaker character on N_n).
    pub fn superdiagonal_sum(&self, t: &FieldTower) -> El {
        let mut acc = ZERO;
        for i in 0..self.n.saturating_sub(1) {
            acc = t.add(acc, self.get(i, i + 1));
        }
        acc
    }

    /// Trace.
    pub fn trace(&self, t: &FieldTower) -> El {
        let mut acc = ZERO;
        for i in 0..self.n {
            acc = t.add(acc, self.get(i, i));
        }
        acc
    }
}

/// Conjugacy invariants of g ∈ GL_n(F_{q^d}) relevant to the cuspidal
/// character: Null unless the characteristic polynomial is f^m for a single
/// monic irreducible f.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ClassData {
    Null,
    Primary {
        /// Monic irreducible factor, coefficients low-to-high.
        f: Vec<El>,
        deg_f: usize,
        /// Multiplicity: char poly = f^m.
        m: usize,
        /// Jordan-block count: nullity(f(g))/deg_f.
        k: usize,
        /// Fixed root of f in F_{q^{d·deg_f}} (least local index).
        root: El,
    },
}

impl ClassData {
    /// Hashable key identifying the character-relevant class invariants.
    pub fn cache_key(&self) -> Vec<u64> {
        match self {
            ClassData::Null => vec![u64::MAX, u64::MAX],
            ClassData::Primary { f, k, .. } => {
                let mut v: Vec<u64> = f.iter().map(|&c| el_key(c)).collect();
                v.push(*k as u64);
                v
            }
        }
    }
}

// --- polynomial helpers over a tower field (coefficients low-to-high) ---

pub type Poly = Vec<El>;

pub fn poly_trim(a: &mut Poly) {
    while a.len() > 1 && a.last().unwrap().is_none() {
        a.pop();
    }
}

pub fn poly_mul(t: &FieldTower, a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai.is_none() {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = t.add(out[i + j], t.mul(ai, bj));
        }
    }
    poly_trim(&mut out);
    out
}

pub fn poly_add(t: &FieldTower, a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![ZERO; a.len().max(b.len())];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(ZERO);
        let y = b.get(i).copied().unwrap_or(ZERO);
        *o = t.add(x, y);
    }
    poly_trim(&mut out);
    out
}

pub fn poly_pow(t: &FieldTower, a: &Poly, e: usize) -> Poly {
    let mut out = vec![ONE];
    for _ in 0..e {
        out = poly_mul(t, &out, a);
    }
    out
}

/// Remainder of a by the monic polynomial m.
pub fn poly_rem(t: &FieldTower, a: &Poly, m: &Poly) -> Poly {
    let mut r = a.clone();
    poly_trim(&mut r);
    let dm = m.len() - 1;
    debug_assert_eq!(*m.last().unwrap(), ONE, "divisor must be monic");
    while r.len() > dm {
        let c = *r.last().unwrap();
        if c.is_some() {
            let shift = r.len() - 1 - dm;
            for (i, &mi) in m.iter().enumerate() {
                r[shift + i] = t.sub(r[shift + i], t.mul(c, mi));
            }
        }
        r.pop();
        poly_trim(&mut r);
    }
    poly_trim(&mut r);
    r
}

pub fn poly_is_zero(a: &Poly) -> bool {
    a.iter().all(|c| c.is_none())
}

/// Evaluate a polynomial at a field element (coefficients embed along the
/// identity into any larger tower degree).
pub fn poly_eval(t: &FieldTower, a: &Poly, x: El) -> El {
    let mut acc = ZERO;
    for &c in a.iter().rev() {
        acc = t.add(t.mul(acc, x), c);
    }
    acc
}

/// Evaluate a polynomial at a matrix (Horner).
pub fn poly_eval_mat(t: &FieldTower, a: &Poly, g: &Mat) -> Mat {
    let n = g.n;
    let mut acc = Mat::zero(n, g.d);
    for &c in a.iter().rev() {
        acc = acc.mul(t, g);
        for i in 0..n {
            acc.set(i, i, t.add(acc.get(i, i), c));
        }
    }
    acc
}

/// Characteristic polynomial det(X·1 − g), exact, by signed permutation
/// expansion (n ≤ 4 at desk scale).
pub fn char_poly(t: &FieldTower, g: &Mat) -> Poly {
    let n = g.n;
    let mut result = vec![ZERO];
    let mut perm: Vec<usize> = (0..n).collect();
    permute_signed(&mut perm, 0, 1, &mut |perm, sign| {
        let mut prod = vec![ONE];
        for (i, &j) in perm.iter().enumerate() {
            // (X·1 − g)[i][j]
            let lin: Poly = if i == j {
                vec![t.neg(g.get(i, j)), ONE]
            } else {
                vec![t.neg(g.get(i, j))]
            };
            prod = poly_mul(t, &prod, &lin);
        }
        if sign < 0 {
            for c in prod.iter_mut() {
                *c = t.neg(*c);
            }
        }
        result = poly_add(t, &result, &prod);
    });
    result
}

fn permute_signed(
    perm: &mut Vec<usize>,
    start: usize,
    sign: i32,
    f: &mut impl FnMut(&[usize], i32),
) {
    let n = perm.len();
    if start == n {
        f(perm, sign);
        return;
    }
    for i in start..n {
        perm.swap(start, i);
        let s = if i == start { sign } else { -sign };
        permute_signed(perm, start + 1, s, f);
        perm.swap(start, i);
    }
}

/// Canonical coset representatives of N_n\GL_n(F_{q^d}).
#[derive(Debug)]
pub struct CosetReps {
    pub n: usize,
    pub d: u32,
    pub reps: Vec<Mat>,
    index: HashMap<Vec<u64>, usize>,
}

impl CosetReps {
    /// Index of the representative of the coset of g.
    pub fn coset_of(&self, t: &FieldTower, g: &Mat) -> usize {
        let c = canonical_coset_rep(t, g);
        *self
            .index
            .get(&c.key())
            .expect("matrix not in the enumerated group")
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }
}

/// The unique normal form of the coset N_n·g: row i is reduced modulo the
/// span of the rows below it (only row operations row_i += c·row_j with
/// i < j are used, i.e. left multiplication by upper unitriangular matrices).
pub fn canonical_coset_rep(t: &FieldTower, g: &Mat) -> Mat {
    let n = g.n;
    let mut rows: Vec<Vec<El>> = (0..n).map(|i| (0..n).map(|j| g.get(i, j)).collect()).collect();
    for i in (0..n.saturating_sub(1)).rev() {
        // Reduced echelon basis of the span of the rows below row i.
        let mut basis: Vec<Vec<El>> = rows[i + 1..].to_vec();
        rref_rows(t, &mut basis);
        for b in &basis {
            let piv = b.iter().position(|c| c.is_some()).unwrap();
            let c = rows[i][piv];
            if c.is_some() {
                for j in 0..n {
                    rows[i][j] = t.sub(rows[i][j], t.mul(c, b[j]));
                }
            }
        }
    }
    let mut out = Mat::zero(n, g.d);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out.set(i, j, v);
        }
    }
    out
}

/// In-place reduced row echelon form with pivots normalized to 1.
fn rref_rows(t: &FieldTower, rows: &mut Vec<Vec<El>>) {
    let ncols = if rows.is_empty() { 0 } else { rows[0].len() };
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][col].is_some()) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = t.inv(rows[r][col]);
        for v in rows[r].iter_mut() {
            *v = t.mul(*v, inv);
        }
        for i in 0..rows.len() {
            if i != r && rows[i][col].is_some() {
                let f = rows[i][col];
                for j in 0..ncols {
                    rows[i][j] = t.sub(rows[i][j], t.mul(f, rows[r][j]));
                }
            }
        }
        r += 1;
    }
    rows.truncate(r);
}

/// Kinds of fixed special matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecialKind {
    /// Interleaving permutation σ_{2m} (even n).
    SigmaEven,
    /// Interleaving permutation σ_{2m+1} (odd n).
    SigmaOdd,
    /// w_{m,m} = σ_{2m}.
    Wmm,
    /// w_{m+1,m} (odd n): columns 1..m+1 to odd slots, m+2..2m+1 to even.
    Wm1m,
    /// Longest Weyl element w_n (antidiagonal ones).
    LongestWeyl,
    Identity,
}

/// The permutation matrices of the Jacquet–Shalika / Bump–Friedberg setups.
/// Column i of the result is e_{σ(i)}.
pub fn special_matrix(kind: SpecialKind, n: usize, d: u32) -> Result<Mat> {
    let perm: Vec<usize> = match kind {
        SpecialKind::Identity => (1..=n).collect(),
        SpecialKind::LongestWeyl => (1..=n).rev().collect(),
        SpecialKind::SigmaEven | SpecialKind::Wmm => {
            if n % 2 != 0 {
                return Err(Error::Config("sigma_even needs even n".into()));
            }
            let m = n / 2;
            (1..=m).map(|i| 2 * i - 1).chain((1..=m).map(|j| 2 * j)).collect()
        }
        SpecialKind::SigmaOdd => {
            if n % 2 != 1 {
                return Err(Error::Config("sigma_odd needs odd n".into()));
            }
            let m = n / 2;
            (1..=m)
                .map(|i| 2 * i - 1)
                .chain((1..=m).map(|j| 2 * j))
                .chain(std::iter::once(n))
                .collect()
        }
        SpecialKind::Wm1m => {
            if n % 2 != 1 {
                return Err(Error::Config("w_{m+1,m} needs odd n".into()));
            }
            let m = n / 2;
            (1..=m + 1)
                .map(|i| 2 * i - 1)
                .chain((1..=m).map(|j| 2 * j))
                .collect()
        }
    };
    let mut out = Mat::zero(n, d);
    for (i, &s) in perm.iter().enumerate() {
        out.set(s - 1, i, ONE);
    }
    Ok(out)
}

/// Interleaving embedding J: (g, g′) ↦ the n×n matrix with g on odd-indexed
/// rows/columns and g′ on even-indexed ones (1-based); n = a + b where g is
/// a×a, g′ is b×b, and (a,b) = (m,m) or (m+1,m).
pub fn j_embed(g: &Mat, gp: &Mat) -> Mat {
    let (a, b) = (g.n, gp.n);
    assert!(a == b || a == b + 1, "J embedding needs (m,m) or (m+1,m)");
    let n = a + b;
    let mut out = Mat::zero(n, g.d);
    for i in 0..a {
        for j in 0..a {
            out.set(2 * i, 2 * j, g.get(i, j));
        }
    }
    for i in 0..b {
        for j in 0..b {
            out.set(2 * i + 1, 2 * j + 1, gp.get(i, j));
        }
    }
    out
}

/// Shared context: a tower plus memoized group/coset/irreducible tables.
/// All cached content is deterministic given the tower parameters, so cache
/// state never influences results.
pub struct Ctx {
    pub t: FieldTower,
    pub group_budget: u64,
    disk: Option<Arc<crate::cache::Cache>>,
    irr: RwLock<HashMap<(u32, usize), Arc<Vec<Poly>>>>,
    gl: RwLock<HashMap<(usize, u32), Arc<Vec<Mat>>>>,
    nn: RwLock<HashMap<(usize, u32), Arc<Vec<Mat>>>>,
    pn: RwLock<HashMap<(usize, u32), Arc<Vec<Mat>>>>,
    cosets: RwLock<HashMap<(usize, u32), Arc<CosetReps>>>,
}

impl Ctx {
    pub fn new(t: FieldTower) -> Ctx {
        Ctx::with_budget(t, DEFAULT_GROUP_BUDGET)
    }

    pub fn with_budget(t: FieldTower, group_budget: u64) -> Ctx {
        Ctx {
            t,
            group_budget,
            disk: None,
            irr: RwLock::new(HashMap::new()),
            gl: RwLock::new(HashMap::new()),
            nn: RwLock::new(HashMap::new()),
            pn: RwLock::new(HashMap::new()),
            cosets: RwLock::new(HashMap::new()),
        }
    }

    /// Attach a persistent cache; coset tables and Bessel memo tables will be
    /// loaded from and stored to it. Cache state never changes any result.
    pub fn attach_disk_cache(&mut self, cache: crate::cache::Cache) {
        self.disk = Some(Arc::new(cache));
    }

    pub fn disk(&self) -> Option<&Arc<crate::cache::Cache>> {
        self.disk.as_ref()
    }

    /// Scope prefix tying cache keys to the exact field tower.
    pub fn cache_scope(&self) -> String {
        format!(
            "p{}-k{}-top{}-asai{}-poly{:?}",
            self.t.p, self.t.k, self.t.top, self.t.asai, self.t.poly
        )
    }

    fn check_budget(&self, scan: u128, what: &str) -> Result<()> {
        if scan > self.group_budget as u128 {
            return Err(Error::Budget(format!(
                "{what} needs a scan of {scan} matrices (budget {})",
                self.group_budget
            )));
        }
        Ok(())
    }

    /// All matrices with entries in F_{q^d} satisfying a filter, in the
    /// canonical odometer order over [0, g^0, g^1, ...] entry values.
    fn enumerate_filtered(
        &self,
        n: usize,
        d: u32,
        keep: impl Fn(&Mat) -> bool,
    ) -> Vec<Mat> {
        let elems = self.t.field_elements(d);
        let cells = n * n;
        let total = (elems.len() as u128).pow(cells as u32);
        let mut out = Vec::new();
        let mut odo = vec![0usize; cells];
        for _ in 0..total {
            let m = Mat {
                n,
                d,
                e: odo.iter().map(|&i| elems[i]).collect(),
            };
            if keep(&m) {
                out.push(m);
            }
            for slot in odo.iter_mut() {
                *slot += 1;
                if *slot < elems.len() {
                    break;
                }
                *slot = 0;
            }
        }
        out
    }

    /// GL_n(F_{q^d}), cached.
    pub fn gl(&self, n: usize, d: u32) -> Result<Arc<Vec<Mat>>> {
        if let Some(v) = self.gl.read().unwrap().get(&(n, d)) {
            return Ok(v.clone());
        }
        let q_d = self.t.unit_order(d) as u128 + 1;
        self.check_budget(q_d.pow((n * n) as u32), "GL enumeration")?;
        let v = Arc::new(self.enumerate_filtered(n, d, |m| m.det(&self.t).is_some()));
        self.gl.write().unwrap().insert((n, d), v.clone());
        Ok(v)
    }

    /// Upper unitriangular subgroup N_n(F_{q^d}), cached.
    pub fn nn(&self, n: usize, d: u32) -> Result<Arc<Vec<Mat>>> {
        if let Some(v) = self.nn.read().unwrap().get(&(n, d)) {
            return Ok(v.clone());
        }
        let elems = self.t.field_elements(d);
        let free = n * (n - 1) / 2;
        self.check_budget((elems.len() as u128).pow(free as u32), "N_n enumeration")?;
        let mut out = Vec::new();
        let mut odo = vec![0usize; free];
        let total = (elems.len() as u128).pow(free as u32);
        for _ in 0..total {
            let mut m = Mat::identity(n, d);
            let mut idx = 0;
            for i in 0..n {
                for j in i + 1..n {
                    m.set(i, j, elems[odo[idx]]);
                    idx += 1;
                }
            }
            out.push(m);
            for slot in odo.iter_mut() {
                *slot += 1;
                if *slot < elems.len() {
                    break;
                }
                *slot = 0;
            }
        }
        let v = Arc::new(out);
        self.nn.write().unwrap().insert((n, d), v.clone());
        Ok(v)
    }

    /// Mirabolic subgroup P_n (last row e_n), cached.
    pub fn pn(&self, n: usize, d: u32) -> Result<Arc<Vec<Mat>>> {
        if let Some(v) = self.pn.read().unwrap().get(&(n, d)) {
            return Ok(v.clone());
        }
        let gl = self.gl(n, d)?;
        let v: Vec<Mat> = gl
            .iter()
            .filter(|m| {
                (0..n - 1).all(|j| m.get(n - 1, j).is_none()) && m.get(n - 1, n - 1) == ONE
            })
            .cloned()
            .collect();
        let v = Arc::new(v);
        self.pn.write().unwrap().insert((n, d), v.clone());
        Ok(v)
    }

    /// Canonical coset representatives of N_n\GL_n, cached.
    pub fn coset_reps(&self, n: usize, d: u32) -> Result<Arc<CosetReps>> {
        if let Some(v) = self.cosets.read().unwrap().get(&(n, d)) {
            return Ok(v.clone());
        }
        let disk_key = format!("{}/cosets-n{n}-d{d}", self.cache_scope());
        if let Some(cache) = &self.disk {
            if let Some(keys) = cache.load::<Vec<Vec<u64>>>(&disk_key) {
                let reps: Vec<Mat> = keys
                    .into_iter()
                    .map(|k| Mat {
                        n,
                        d,
                        e: k.into_iter().map(crate::ffchar::el_from_key).collect(),
                    })
                    .collect();
                let index = reps
                    .iter()
                    .enumerate()
                    .map(|(i, r)| (r.key(), i))
                    .collect();
                let v = Arc::new(CosetReps { n, d, reps, index });
                self.cosets.write().unwrap().insert((n, d), v.clone());
                return Ok(v);
            }
        }
        let gl = self.gl(n, d)?;
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut reps: Vec<Mat> = Vec::new();
        for g in gl.iter() {
            let c = canonical_coset_rep(&self.t, g);
            index.entry(c.key()).or_insert_with(|| {
                reps.push(c.clone());
                reps.len() - 1
            });
        }
        // Deterministic order: sort by canonical key, rebuild the index.
        let mut order: Vec<usize> = (0..reps.len()).collect();
        order.sort_by(|&a, &b| reps[a].key().cmp(&reps[b].key()));
        let reps: Vec<Mat> = order.into_iter().map(|i| reps[i].clone()).collect();
        let index = reps
            .iter()
            .enumerate()
            .map(|(i, r)| (r.key(), i))
            .collect();
        let v = Arc::new(CosetReps { n, d, reps, index });
        if let Some(cache) = &self.disk {
            let keys: Vec<Vec<u64>> = v.reps.iter().map(|r| r.key()).collect();
            let _ = cache.store(&disk_key, &keys);
        }
        self.cosets.write().unwrap().insert((n, d), v.clone());
        Ok(v)
    }

    /// Monic irreducible polynomials over F_{q^d} of degree 1..=max_deg,
    /// sorted by (degree, coefficient keys), cached.
    pub fn irreducibles(&self, d: u32, max_deg: usize) -> Arc<Vec<Poly>> {
        if let Some(v) = self.irr.read().unwrap().get(&(d, max_deg)) {
            return v.clone();
        }
        let elems = self.t.field_elements(d);
        let mut irr: Vec<Poly> = Vec::new();
        for deg in 1..=max_deg {
            let mut odo = vec![0usize; deg];
            let total = (elems.len() as u128).pow(deg as u32);
            for _ in 0..total {
                let mut f: Poly = odo.iter().map(|&i| elems[i]).collect();
                f.push(ONE);
                let reducible = irr
                    .iter()
                    .take_while(|g| (g.len() - 1) * 2 <= deg + 1)
                    .any(|g| g.len() - 1 <= deg / 2 && poly_is_zero(&poly_rem(&self.t, &f, g)));
                if !reducible {
                    irr.push(f);
                }
                for slot in odo.iter_mut() {
                    *slot += 1;
                    if *slot < elems.len() {
                        break;
                    }
                    *slot = 0;
                }
            }
        }
        irr.sort_by(|a, b| {
            (a.len(), a.iter().map(|&c| el_key(c)).collect::<Vec<_>>())
                .cmp(&(b.len(), b.iter().map(|&c| el_key(c)).collect::<Vec<_>>()))
        });
        let v = Arc::new(irr);
        self.irr.write().unwrap().insert((d, max_deg), v.clone());
        v
    }

    /// Conjugacy invariants of an invertible matrix.
    pub fn class_data(&self, g: &Mat) -> ClassData {
        let t = &self.t;
        let n = g.n;
        let d = g.d;
        let cp = char_poly(t, g);
        debug_assert_eq!(cp.len(), n + 1);
        for f in self.irreducibles(d, n).iter() {
            let deg_f = f.len() - 1;
            if n % deg_f != 0 {
                continue;
            }
            let m = n / deg_f;
            if poly_pow(t, f, m) != cp {
                continue;
            }
            let fg = poly_eval_mat(t, f, g);
            let nullity = n - fg.rank(t);
            debug_assert_eq!(nullity % deg_f, 0);
            let k = nullity / deg_f;
            let root_degree = d * deg_f as u32;
            let root = (0..t.unit_order(root_degree))
                .map(|j| t.from_local(root_degree, j))
                .find(|&x| poly_eval(t, f, x).is_none())
                .expect("irreducible factor must split in its splitting field");
            return ClassData::Primary {
                f: f.clone(),
                deg_f,
                m,
                k,
                root,
            };
        }
        ClassData::Null
    }
}
