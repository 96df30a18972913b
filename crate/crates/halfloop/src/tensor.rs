//! Exact sparse operators on tensor products of finite-dimensional spaces.
//!
//! A layout consists of zero, one or two auxiliary (matrix) spaces plus the
//! quantum sites `1..L`. Basis states are encoded as mixed-radix integers
//! with the auxiliary digits most significant, followed by site 1 down to
//! site L (site 1 is the most significant site digit). This encoding is
//! fixed; rendered fixtures depend on it.
//!
//! The [`dense`] submodule is a deliberately naive dense engine over the same
//! scalar field. It shares no code with the sparse paths and serves as the
//! brute-force oracle the sparse operations are checked against.

use crate::cyclotomic::CycNum;
use std::collections::BTreeMap;
use std::fmt;

/// One tensor factor: an auxiliary space (0 or 1) or a quantum site (1-based).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Space {
    Aux(usize),
    Site(usize),
}

/// Dimensions of the tensor factors. The auxiliary spaces are distinguished
/// slots: they are traced and transposed, never permuted with sites.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SpaceLayout {
    pub aux_dims: Vec<usize>,
    pub site_dims: Vec<usize>,
}

impl SpaceLayout {
    pub fn new(aux_dims: Vec<usize>, site_dims: Vec<usize>) -> Self {
        assert!(aux_dims.len() <= 2, "at most two auxiliary spaces");
        SpaceLayout {
            aux_dims,
            site_dims,
        }
    }

    pub fn sites_only(site_dims: Vec<usize>) -> Self {
        SpaceLayout::new(vec![], site_dims)
    }

    fn slot(&self, s: Space) -> usize {
        match s {
            Space::Aux(k) => {
                assert!(k < self.aux_dims.len(), "no auxiliary space {}", k);
                k
            }
            Space::Site(l) => {
                assert!(l >= 1 && l <= self.site_dims.len(), "no site {}", l);
                self.aux_dims.len() + l - 1
            }
        }
    }

    fn dims(&self) -> Vec<usize> {
        let mut d = self.aux_dims.clone();
        d.extend_from_slice(&self.site_dims);
        d
    }

    pub fn dim(&self, s: Space) -> usize {
        self.dims()[self.slot(s)]
    }

    pub fn total_dim(&self) -> usize {
        self.dims().iter().product()
    }

    fn decode(&self, mut idx: usize) -> Vec<usize> {
        let dims = self.dims();
        let mut digits = vec![0; dims.len()];
        for (k, d) in dims.iter().enumerate().rev() {
            digits[k] = idx % d;
            idx /= d;
        }
        digits
    }

    fn encode(&self, digits: &[usize]) -> usize {
        let dims = self.dims();
        let mut idx = 0;
        for (k, d) in dims.iter().enumerate() {
            debug_assert!(digits[k] < *d);
            idx = idx * d + digits[k];
        }
        idx
    }

    /// Layout with one tensor factor removed.
    fn without(&self, s: Space) -> SpaceLayout {
        let mut aux = self.aux_dims.clone();
        let mut sites = self.site_dims.clone();
        match s {
            Space::Aux(k) => {
                aux.remove(k);
            }
            Space::Site(l) => {
                sites.remove(l - 1);
            }
        }
        SpaceLayout::new(aux, sites)
    }
}

/// An exact sparse operator; no explicit zeros are stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SparseOp {
    layout: SpaceLayout,
    entries: BTreeMap<(usize, usize), CycNum>,
}

impl SparseOp {
    pub fn zero(layout: SpaceLayout) -> Self {
        SparseOp {
            layout,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(layout: SpaceLayout, order: u32) -> Self {
        let n = layout.total_dim();
        let mut entries = BTreeMap::new();
        for k in 0..n {
            entries.insert((k, k), CycNum::one(order));
        }
        SparseOp { layout, entries }
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &CycNum)> {
        self.entries.iter()
    }

    pub fn entry(&self, r: usize, c: usize) -> Option<&CycNum> {
        self.entries.get(&(r, c))
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    fn insert_add(&mut self, key: (usize, usize), v: CycNum) {
        if v.is_zero() {
            return;
        }
        match self.entries.get_mut(&key) {
            Some(e) => {
                let next = e.add(&v);
                if next.is_zero() {
                    self.entries.remove(&key);
                } else {
                    *e = next;
                }
            }
            None => {
                self.entries.insert(key, v);
            }
        }
    }

    pub fn set_entry(&mut self, r: usize, c: usize, v: CycNum) {
        if v.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), v);
        }
    }

    /// `E_ij` acting on one space (0-based indices), identity elsewhere.
    pub fn elementary(layout: SpaceLayout, s: Space, i: usize, j: usize, order: u32) -> Self {
        let d = layout.dim(s);
        assert!(i < d && j < d, "elementary index out of range");
        let slot = layout.slot(s);
        let mut op = SparseOp::zero(layout);
        for col in 0..op.layout.total_dim() {
            let digits = op.layout.decode(col);
            if digits[slot] == j {
                let mut rd = digits.clone();
                rd[slot] = i;
                let row = op.layout.encode(&rd);
                op.entries.insert((row, col), CycNum::one(order));
            }
        }
        op
    }

    /// The transposition operator between two equal-dimension spaces.
    pub fn permutation(layout: SpaceLayout, x: Space, y: Space, order: u32) -> Self {
        assert_eq!(
            layout.dim(x),
            layout.dim(y),
            "permutation needs equal dimensions"
        );
        let sx = layout.slot(x);
        let sy = layout.slot(y);
        let mut op = SparseOp::zero(layout);
        for col in 0..op.layout.total_dim() {
            let mut digits = op.layout.decode(col);
            digits.swap(sx, sy);
            let row = op.layout.encode(&digits);
            op.entries.insert((row, col), CycNum::one(order));
        }
        op
    }

    /// Embed a one-space matrix into the full layout.
    pub fn embed(layout: SpaceLayout, s: Space, mat: &DenseMat) -> Self {
        assert_eq!(layout.dim(s), mat.rows);
        assert_eq!(mat.rows, mat.cols);
        let slot = layout.slot(s);
        let mut op = SparseOp::zero(layout);
        for col in 0..op.layout.total_dim() {
            let digits = op.layout.decode(col);
            let b = digits[slot];
            for a in 0..mat.rows {
                let v = mat.get(a, b);
                if !v.is_zero() {
                    let mut rd = digits.clone();
                    rd[slot] = a;
                    let row = op.layout.encode(&rd);
                    op.insert_add((row, col), v.clone());
                }
            }
        }
        op
    }

    pub fn add(&self, other: &SparseOp) -> SparseOp {
        assert_eq!(self.layout, other.layout, "layout mismatch in add");
        let mut out = self.clone();
        for (k, v) in &other.entries {
            out.insert_add(*k, v.clone());
        }
        out
    }

    pub fn neg(&self) -> SparseOp {
        SparseOp {
            layout: self.layout.clone(),
            entries: self
                .entries
                .iter()
                .map(|(k, v)| (*k, v.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &SparseOp) -> SparseOp {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &CycNum) -> SparseOp {
        if c.is_zero() {
            return SparseOp::zero(self.layout.clone());
        }
        SparseOp {
            layout: self.layout.clone(),
            entries: self
                .entries
                .iter()
                .map(|(k, v)| (*k, v.mul(c)))
                .collect(),
        }
    }

    pub fn mul(&self, other: &SparseOp) -> SparseOp {
        assert_eq!(self.layout, other.layout, "layout mismatch in mul");
        // group the right factor by row for the sparse product
        let mut by_row: BTreeMap<usize, Vec<(usize, &CycNum)>> = BTreeMap::new();
        for ((r, c), v) in &other.entries {
            by_row.entry(*r).or_default().push((*c, v));
        }
        let mut out = SparseOp::zero(self.layout.clone());
        for ((r, k), a) in &self.entries {
            if let Some(row) = by_row.get(k) {
                for (c, b) in row {
                    out.insert_add((*r, *c), a.mul(b));
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &SparseOp) -> SparseOp {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn trace(&self, order: u32) -> CycNum {
        let mut acc = CycNum::zero(order);
        for ((r, c), v) in &self.entries {
            if r == c {
                acc = acc.add(v);
            }
        }
        acc
    }

    /// Trace out one tensor factor; the result lives on the reduced layout.
    pub fn partial_trace(&self, s: Space) -> SparseOp {
        let slot = self.layout.slot(s);
        let reduced = self.layout.without(s);
        let mut out = SparseOp::zero(reduced);
        for ((r, c), v) in &self.entries {
            let mut rd = self.layout.decode(*r);
            let mut cd = self.layout.decode(*c);
            if rd[slot] != cd[slot] {
                continue;
            }
            rd.remove(slot);
            cd.remove(slot);
            let key = (out.layout.encode(&rd), out.layout.encode(&cd));
            out.insert_add(key, v.clone());
        }
        out
    }

    /// Transposition of the indices of one tensor factor only.
    pub fn transpose_space(&self, s: Space) -> SparseOp {
        let slot = self.layout.slot(s);
        let mut out = SparseOp::zero(self.layout.clone());
        for ((r, c), v) in &self.entries {
            let mut rd = self.layout.decode(*r);
            let mut cd = self.layout.decode(*c);
            std::mem::swap(&mut rd[slot], &mut cd[slot]);
            out.insert_add(
                (self.layout.encode(&rd), self.layout.encode(&cd)),
                v.clone(),
            );
        }
        out
    }

    /// The quantum-space operator `<i| X |j>` taken in one auxiliary slot.
    pub fn aux_entry(&self, aux: usize, i: usize, j: usize) -> SparseOp {
        let s = Space::Aux(aux);
        let slot = self.layout.slot(s);
        let reduced = self.layout.without(s);
        let mut out = SparseOp::zero(reduced);
        for ((r, c), v) in &self.entries {
            let mut rd = self.layout.decode(*r);
            let mut cd = self.layout.decode(*c);
            if rd[slot] != i || cd[slot] != j {
                continue;
            }
            rd.remove(slot);
            cd.remove(slot);
            let key = (out.layout.encode(&rd), out.layout.encode(&cd));
            out.insert_add(key, v.clone());
        }
        out
    }

    /// First nonzero entry in row-major order, for failure witnesses.
    pub fn first_entry_rendered(&self) -> Option<String> {
        self.entries
            .iter()
            .next()
            .map(|((r, c), v)| format!("[{},{}] = {}", r, c, v))
    }
}

impl fmt::Display for SparseOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((r, c), v) in &self.entries {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "[{},{}]={}", r, c, v)?;
        }
        Ok(())
    }
}

/// A small dense square matrix over the field; used for representation
/// matrices, grading matrices and the boundary matrix `K`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DenseMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<CycNum>,
}

impl DenseMat {
    pub fn zero(rows: usize, cols: usize, order: u32) -> Self {
        DenseMat {
            rows,
            cols,
            data: vec![CycNum::zero(order); rows * cols],
        }
    }

    pub fn identity(n: usize, order: u32) -> Self {
        let mut m = DenseMat::zero(n, n, order);
        for i in 0..n {
            m.set(i, i, CycNum::one(order));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<CycNum>>) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        assert!(rows.iter().all(|row| row.len() == c));
        DenseMat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &CycNum {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: CycNum) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &DenseMat) -> DenseMat {
        assert_eq!(self.cols, other.rows);
        let order = self.data[0].order();
        let mut out = DenseMat::zero(self.rows, other.cols, order);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = CycNum::zero(order);
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn add(&self, other: &DenseMat) -> DenseMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for i in 0..self.rows * self.cols {
            out.data[i] = out.data[i].add(&other.data[i]);
        }
        out
    }

    pub fn sub(&self, other: &DenseMat) -> DenseMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for i in 0..self.rows * self.cols {
            out.data[i] = out.data[i].sub(&other.data[i]);
        }
        out
    }

    pub fn scale(&self, c: &CycNum) -> DenseMat {
        DenseMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.mul(c)).collect(),
        }
    }

    pub fn transpose(&self) -> DenseMat {
        let order = self.data[0].order();
        let mut out = DenseMat::zero(self.cols, self.rows, order);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    /// Gauss-Jordan inverse; `None` for singular matrices.
    pub fn inverse(&self) -> Option<DenseMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let order = self.data[0].order();
        let mut a = self.clone();
        let mut inv = DenseMat::identity(n, order);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a.get(r, col).is_zero())?;
            if pivot != col {
                for j in 0..n {
                    let tmp = a.get(pivot, j).clone();
                    a.set(pivot, j, a.get(col, j).clone());
                    a.set(col, j, tmp);
                    let tmp = inv.get(pivot, j).clone();
                    inv.set(pivot, j, inv.get(col, j).clone());
                    inv.set(col, j, tmp);
                }
            }
            let scale = a.get(col, col).inverse().ok()?;
            for j in 0..n {
                a.set(col, j, a.get(col, j).mul(&scale));
                inv.set(col, j, inv.get(col, j).mul(&scale));
            }
            for r in 0..n {
                if r != col && !a.get(r, col).is_zero() {
                    let factor = a.get(r, col).clone();
                    for j in 0..n {
                        let na = a.get(r, j).sub(&factor.mul(a.get(col, j)));
                        a.set(r, j, na);
                        let ni = inv.get(r, j).sub(&factor.mul(inv.get(col, j)));
                        inv.set(r, j, ni);
                    }
                }
            }
        }
        Some(inv)
    }
}

/// Diagonal grading matrix `diag(1...,tau...,tau^2...,...)` with the given
/// multiplicities; satisfies `G^n = 1`.
pub fn grading_matrix(order: u32, n: u32, multiplicities: &[usize]) -> DenseMat {
    assert_eq!(multiplicities.len(), n as usize);
    let big_n: usize = multiplicities.iter().sum();
    let tau = CycNum::tau(order, n);
    let mut g = DenseMat::zero(big_n, big_n, order);
    let mut row = 0;
    for (k, mult) in multiplicities.iter().enumerate() {
        for _ in 0..*mult {
            g.set(row, row, tau.pow(k as i64));
            row += 1;
        }
    }
    g
}

/// Grading exponent of each basis vector (the power of `tau` on the diagonal).
pub fn grading_exponents(multiplicities: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    for (k, mult) in multiplicities.iter().enumerate() {
        for _ in 0..*mult {
            out.push(k);
        }
    }
    out
}

/// A family of matrices for the `gl_N` generators `e_ij` at one site,
/// validated at construction against the defining bracket
/// `[e_ij, e_kl] = d_jk e_il - d_il e_kj`.
#[derive(Clone, Debug)]
pub struct RepMatrices {
    pub big_n: usize,
    pub dim: usize,
    mats: Vec<DenseMat>,
}

impl RepMatrices {
    pub fn new(big_n: usize, dim: usize, mats: Vec<DenseMat>, order: u32) -> RepMatrices {
        assert_eq!(mats.len(), big_n * big_n);
        for m in &mats {
            assert_eq!((m.rows, m.cols), (dim, dim));
        }
        let rep = RepMatrices { big_n, dim, mats };
        rep.validate(order);
        rep
    }

    fn validate(&self, order: u32) {
        let n = self.big_n;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let lhs = self
                            .e(i, j)
                            .mul(self.e(k, l))
                            .sub(&self.e(k, l).mul(self.e(i, j)));
                        let mut rhs = DenseMat::zero(self.dim, self.dim, order);
                        if j == k {
                            rhs = rhs.add(self.e(i, l));
                        }
                        if i == l {
                            rhs = rhs.sub(self.e(k, j));
                        }
                        assert!(
                            lhs.sub(&rhs).is_zero(),
                            "representation violates the gl_N bracket at ({},{},{},{})",
                            i,
                            j,
                            k,
                            l
                        );
                    }
                }
            }
        }
    }

    pub fn e(&self, i: usize, j: usize) -> &DenseMat {
        &self.mats[i * self.big_n + j]
    }

    /// The defining representation: `rho(e_ij) = E_ij`.
    pub fn fundamental(big_n: usize, order: u32) -> RepMatrices {
        let mut mats = Vec::with_capacity(big_n * big_n);
        for i in 0..big_n {
            for j in 0..big_n {
                let mut m = DenseMat::zero(big_n, big_n, order);
                m.set(i, j, CycNum::one(order));
                mats.push(m);
            }
        }
        RepMatrices::new(big_n, big_n, mats, order)
    }

    /// The three-dimensional (spin-1) representation of `gl_2` on the
    /// polynomial basis `x^2, xy, y^2`: `e_11 = x d/dx`, `e_22 = y d/dy`,
    /// `e_12 = x d/dy`, `e_21 = y d/dx`.
    pub fn gl2_spin1(order: u32) -> RepMatrices {
        let z = |m: &mut DenseMat, i: usize, j: usize, v: i64| {
            m.set(i, j, CycNum::from_int(order, v));
        };
        let mut e11 = DenseMat::zero(3, 3, order);
        z(&mut e11, 0, 0, 2);
        z(&mut e11, 1, 1, 1);
        let mut e22 = DenseMat::zero(3, 3, order);
        z(&mut e22, 1, 1, 1);
        z(&mut e22, 2, 2, 2);
        let mut e12 = DenseMat::zero(3, 3, order);
        z(&mut e12, 0, 1, 1);
        z(&mut e12, 1, 2, 2);
        let mut e21 = DenseMat::zero(3, 3, order);
        z(&mut e21, 1, 0, 2);
        z(&mut e21, 2, 1, 1);
        RepMatrices::new(2, 3, vec![e11, e12, e21, e22], order)
    }
}

/// The representation coupling `P_{a,site} = sum_ij E_ij (aux) x rho(e_ji) (site)`.
/// In the fundamental this is the transposition operator between the
/// auxiliary space and the site.
pub fn coupling_p(
    layout: &SpaceLayout,
    aux: usize,
    site: usize,
    rep: &RepMatrices,
    order: u32,
) -> SparseOp {
    assert_eq!(layout.dim(Space::Aux(aux)), rep.big_n);
    assert_eq!(layout.dim(Space::Site(site)), rep.dim);
    let mut acc = SparseOp::zero(layout.clone());
    for i in 0..rep.big_n {
        for j in 0..rep.big_n {
            let e_aux = SparseOp::elementary(layout.clone(), Space::Aux(aux), i, j, order);
            let rho = SparseOp::embed(layout.clone(), Space::Site(site), rep.e(j, i));
            acc = acc.add(&e_aux.mul(&rho));
        }
    }
    acc
}

/// The reflected coupling `Q_{a,site} = -K_a P_{a,site}^{t_a} K_a^{-1}`.
///
/// The sign implements the order-2 automorphism `X -> -K X^t K^{-1}` of the
/// matrix Lie algebra (transpose alone reverses brackets); it is what makes
/// the degree-zero symmetry generators close on so(p,q) / sp(N).
pub fn coupling_q(
    layout: &SpaceLayout,
    aux: usize,
    site: usize,
    rep: &RepMatrices,
    k_mat: &DenseMat,
    order: u32,
) -> SparseOp {
    let p = coupling_p(layout, aux, site, rep, order);
    let k_inv = k_mat.inverse().expect("boundary matrix K must be invertible");
    let k_op = SparseOp::embed(layout.clone(), Space::Aux(aux), k_mat);
    let k_inv_op = SparseOp::embed(layout.clone(), Space::Aux(aux), &k_inv);
    k_op.mul(&p.transpose_space(Space::Aux(aux)))
        .mul(&k_inv_op)
        .neg()
}

pub mod dense {
    //! Brute-force dense oracle: same semantics as the sparse engine,
    //! implemented from scratch on flat matrices.

    use super::{Space, SpaceLayout};
    use crate::cyclotomic::CycNum;

    #[derive(Clone, PartialEq, Eq, Debug)]
    pub struct DenseOp {
        pub layout: SpaceLayout,
        pub data: Vec<Vec<CycNum>>,
    }

    impl DenseOp {
        pub fn zero(layout: SpaceLayout, order: u32) -> Self {
            let n = layout.total_dim();
            DenseOp {
                layout,
                data: vec![vec![CycNum::zero(order); n]; n],
            }
        }

        pub fn identity(layout: SpaceLayout, order: u32) -> Self {
            let mut op = DenseOp::zero(layout, order);
            for i in 0..op.data.len() {
                op.data[i][i] = CycNum::one(order);
            }
            op
        }

        pub fn from_sparse(op: &super::SparseOp, order: u32) -> Self {
            let mut out = DenseOp::zero(op.layout().clone(), order);
            for ((r, c), v) in op.entries() {
                out.data[*r][*c] = v.clone();
            }
            out
        }

        pub fn to_sparse(&self) -> super::SparseOp {
            let mut out = super::SparseOp::zero(self.layout.clone());
            for (r, row) in self.data.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    if !v.is_zero() {
                        out.set_entry(r, c, v.clone());
                    }
                }
            }
            out
        }

        pub fn mul(&self, other: &DenseOp, order: u32) -> DenseOp {
            assert_eq!(self.layout, other.layout);
            let n = self.data.len();
            let mut out = DenseOp::zero(self.layout.clone(), order);
            for i in 0..n {
                for j in 0..n {
                    let mut acc = CycNum::zero(order);
                    for k in 0..n {
                        if !self.data[i][k].is_zero() && !other.data[k][j].is_zero() {
                            acc = acc.add(&self.data[i][k].mul(&other.data[k][j]));
                        }
                    }
                    out.data[i][j] = acc;
                }
            }
            out
        }

        pub fn add(&self, other: &DenseOp, order: u32) -> DenseOp {
            assert_eq!(self.layout, other.layout);
            let n = self.data.len();
            let mut out = DenseOp::zero(self.layout.clone(), order);
            for i in 0..n {
                for j in 0..n {
                    out.data[i][j] = self.data[i][j].add(&other.data[i][j]);
                }
            }
            out
        }

        pub fn trace(&self, order: u32) -> CycNum {
            let mut acc = CycNum::zero(order);
            for i in 0..self.data.len() {
                acc = acc.add(&self.data[i][i]);
            }
            acc
        }

        pub fn partial_trace(&self, s: Space, order: u32) -> DenseOp {
            let slot = match s {
                Space::Aux(k) => k,
                Space::Site(l) => self.layout.aux_dims.len() + l - 1,
            };
            let mut reduced_aux = self.layout.aux_dims.clone();
            let mut reduced_sites = self.layout.site_dims.clone();
            let traced_dim;
            match s {
                Space::Aux(k) => {
                    traced_dim = reduced_aux.remove(k);
                }
                Space::Site(l) => {
                    traced_dim = reduced_sites.remove(l - 1);
                }
            }
            let reduced = SpaceLayout::new(reduced_aux, reduced_sites);
            let mut out = DenseOp::zero(reduced, order);
            let n = self.data.len();
            for r in 0..n {
                for c in 0..n {
                    if self.data[r][c].is_zero() {
                        continue;
                    }
                    let rd = decode(&self.layout, r);
                    let cd = decode(&self.layout, c);
                    if rd[slot] != cd[slot] {
                        continue;
                    }
                    let _ = traced_dim;
                    let mut rr = rd.clone();
                    let mut cc = cd.clone();
                    rr.remove(slot);
                    cc.remove(slot);
                    let ri = encode(&out.layout, &rr);
                    let ci = encode(&out.layout, &cc);
                    out.data[ri][ci] = out.data[ri][ci].add(&self.data[r][c]);
                }
            }
            out
        }

        pub fn transpose_space(&self, s: Space, order: u32) -> DenseOp {
            let slot = match s {
                Space::Aux(k) => k,
                Space::Site(l) => self.layout.aux_dims.len() + l - 1,
            };
            let mut out = DenseOp::zero(self.layout.clone(), order);
            let n = self.data.len();
            for r in 0..n {
                for c in 0..n {
                    if self.data[r][c].is_zero() {
                        continue;
                    }
                    let mut rd = decode(&self.layout, r);
                    let mut cd = decode(&self.layout, c);
                    std::mem::swap(&mut rd[slot], &mut cd[slot]);
                    let ri = encode(&self.layout, &rd);
                    let ci = encode(&self.layout, &cd);
                    out.data[ri][ci] = out.data[ri][ci].add(&self.data[r][c]);
                }
            }
            out
        }
    }

    fn dims(layout: &SpaceLayout) -> Vec<usize> {
        let mut d = layout.aux_dims.clone();
        d.extend_from_slice(&layout.site_dims);
        d
    }

    fn decode(layout: &SpaceLayout, mut idx: usize) -> Vec<usize> {
        let ds = dims(layout);
        let mut digits = vec![0; ds.len()];
        for (k, d) in ds.iter().enumerate().rev() {
            digits[k] = idx % d;
            idx /= d;
        }
        digits
    }

    fn encode(layout: &SpaceLayout, digits: &[usize]) -> usize {
        let ds = dims(layout);
        let mut idx = 0;
        for (k, d) in ds.iter().enumerate() {
            idx = idx * d + digits[k];
        }
        idx
    }
}
