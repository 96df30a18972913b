//! Multivariate polynomials and rational functions over `Q(zeta_m)`.
//!
//! Variables are the particle positions `q_1..q_L` plus the formal parameters
//! `lambda`, `mu_0..mu_{n-1}`, `hbar`. Denominators are kept as factored
//! multisets of the linear forms `q_i - c*q_j` (with `i < j` and the lower
//! variable monic) and `q_i`; the operators built downstream never produce
//! any other denominator, which makes trial division by a factor the only
//! simplification ever needed and gives a canonical reduced form (linear
//! forms are primes in the polynomial ring).
//!
//! Parameters appear in numerators only.

use crate::cyclotomic::CycNum;
use std::collections::BTreeMap;
use std::fmt;

/// Variable identifiers, ordered `q_1 < ... < q_L < lambda < mu_0 < ... < hbar`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Var {
    Q(u32),
    Lambda,
    Mu(u32),
    Hbar,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Q(i) => write!(f, "q{}", i),
            Var::Lambda => write!(f, "lambda"),
            Var::Mu(k) => write!(f, "mu{}", k),
            Var::Hbar => write!(f, "hbar"),
        }
    }
}

/// A power product of variables; no zero exponents are stored.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial(BTreeMap<Var, u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(BTreeMap::new())
    }

    pub fn var(v: Var, e: u32) -> Self {
        let mut m = BTreeMap::new();
        if e > 0 {
            m.insert(v, e);
        }
        Monomial(m)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (v, e) in &other.0 {
            *out.entry(*v).or_insert(0) += e;
        }
        Monomial(out)
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.0.get(&v).copied().unwrap_or(0)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponents(&self) -> impl Iterator<Item = (&Var, &u32)> {
        self.0.iter()
    }

    fn without(&self, v: Var) -> Monomial {
        let mut m = self.0.clone();
        m.remove(&v);
        Monomial(m)
    }

    fn with_exponent(&self, v: Var, e: u32) -> Monomial {
        let mut m = self.0.clone();
        if e == 0 {
            m.remove(&v);
        } else {
            m.insert(v, e);
        }
        Monomial(m)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for (v, e) in &self.0 {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if *e == 1 {
                write!(f, "{}", v)?;
            } else {
                write!(f, "{}^{}", v, e)?;
            }
        }
        Ok(())
    }
}

/// A substitution `q_i -> scale_i * q_{target_i}` (1-based), with parameters
/// untouched. Scales are roots of unity in practice; targets a permutation.
#[derive(Clone, Debug)]
pub struct PosSubst {
    pub scale: Vec<CycNum>,
    pub target: Vec<u32>,
}

impl PosSubst {
    pub fn identity(order: u32, l: usize) -> Self {
        PosSubst {
            scale: vec![CycNum::one(order); l],
            target: (1..=l as u32).collect(),
        }
    }

    fn scale_of(&self, i: u32) -> &CycNum {
        &self.scale[(i - 1) as usize]
    }

    fn target_of(&self, i: u32) -> u32 {
        self.target[(i - 1) as usize]
    }
}

/// Polynomial in canonical form: sorted term map, no zero coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    order: u32,
    terms: BTreeMap<Monomial, CycNum>,
}

impl Poly {
    pub fn zero(order: u32) -> Self {
        Poly {
            order,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: CycNum) -> Self {
        let mut p = Poly::zero(c.order());
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn one(order: u32) -> Self {
        Poly::constant(CycNum::one(order))
    }

    pub fn var(order: u32, v: Var) -> Self {
        Poly::term(CycNum::one(order), Monomial::var(v, 1))
    }

    pub fn term(c: CycNum, m: Monomial) -> Self {
        let mut p = Poly::zero(c.order());
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &CycNum)> {
        self.terms.iter()
    }

    fn insert_add(&mut self, m: Monomial, c: CycNum) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let next = existing.add(&c);
                if next.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = next;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.order, other.order);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_add(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            order: self.order,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.order, other.order);
        let mut out = Poly::zero(self.order);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.insert_add(m1.mul(m2), c1.mul(c2));
            }
        }
        out
    }

    pub fn scale(&self, c: &CycNum) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.order);
        }
        Poly {
            order: self.order,
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k.mul(c)))
                .collect(),
        }
    }

    pub fn derivative(&self, i: u32) -> Poly {
        let v = Var::Q(i);
        let mut out = Poly::zero(self.order);
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e > 0 {
                out.insert_add(
                    m.with_exponent(v, e - 1),
                    c.mul(&CycNum::from_int(self.order, e as i64)),
                );
            }
        }
        out
    }

    /// Textual substitution `q_i -> scale_i * q_{target_i}`.
    pub fn substitute(&self, s: &PosSubst) -> Poly {
        let mut out = Poly::zero(self.order);
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut mono = Monomial::one();
            for (v, e) in m.exponents() {
                match v {
                    Var::Q(i) => {
                        coeff = coeff.mul(&s.scale_of(*i).pow(*e as i64));
                        mono = mono.mul(&Monomial::var(Var::Q(s.target_of(*i)), *e));
                    }
                    other => mono = mono.mul(&Monomial::var(*other, *e)),
                }
            }
            out.insert_add(mono, coeff);
        }
        out
    }

    /// Replace a parameter variable by a field value.
    pub fn substitute_param(&self, v: Var, value: &CycNum) -> Poly {
        let mut out = Poly::zero(self.order);
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e == 0 {
                out.insert_add(m.clone(), c.clone());
            } else {
                out.insert_add(m.without(v), c.mul(&value.pow(e as i64)));
            }
        }
        out
    }

    pub fn eval(&self, assign: &BTreeMap<Var, CycNum>) -> CycNum {
        let mut acc = CycNum::zero(self.order);
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m.exponents() {
                let val = assign
                    .get(v)
                    .unwrap_or_else(|| panic!("unassigned variable {}", v));
                t = t.mul(&val.pow(*e as i64));
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// Exact division by a linear form; `None` when the form does not divide.
    pub fn divide_by_linform(&self, f: &LinForm) -> Option<Poly> {
        match f {
            LinForm::Single(i) => {
                let v = Var::Q(*i);
                let mut out = Poly::zero(self.order);
                for (m, c) in &self.terms {
                    let e = m.exponent(v);
                    if e == 0 {
                        return None;
                    }
                    out.insert_add(m.with_exponent(v, e - 1), c.clone());
                }
                Some(out)
            }
            LinForm::Diff { i, j, c } => {
                // Synthetic division in q_i: with P = sum_d A_d q_i^d,
                // remainder = P(q_i -> c q_j) and quotient
                // Q = sum_{d>=1} A_d (q_i^{d-1} + (c q_j) q_i^{d-2} + ...).
                let vi = Var::Q(*i);
                let vj = Var::Q(*j);
                let mut remainder = Poly::zero(self.order);
                let mut quotient = Poly::zero(self.order);
                for (m, coeff) in &self.terms {
                    let d = m.exponent(vi);
                    let base = m.without(vi);
                    let ej = base.exponent(vj);
                    remainder.insert_add(
                        base.with_exponent(vj, ej + d),
                        coeff.mul(&c.pow(d as i64)),
                    );
                    for t in 0..d {
                        let mono = base
                            .with_exponent(vj, ej + t)
                            .with_exponent(vi, d - 1 - t);
                        quotient.insert_add(mono, coeff.mul(&c.pow(t as i64)));
                    }
                }
                if remainder.is_zero() {
                    Some(quotient)
                } else {
                    None
                }
            }
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if m.is_one() {
                write!(f, "({})", c)?;
            } else if c.is_one() {
                write!(f, "{}", m)?;
            } else {
                write!(f, "({})*{}", c, m)?;
            }
        }
        Ok(())
    }
}

/// A normalized linear denominator factor: `q_i` or `q_i - c*q_j` with
/// `i < j`, nonzero `c`, and the lower-indexed variable monic.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum LinForm {
    Single(u32),
    Diff { i: u32, j: u32, c: CycNum },
}

impl LinForm {
    pub fn diff(i: u32, j: u32, c: CycNum) -> LinForm {
        assert!(i < j, "LinForm::diff needs i < j");
        assert!(!c.is_zero(), "LinForm::diff needs nonzero coefficient");
        LinForm::Diff { i, j, c }
    }

    pub fn to_poly(&self, order: u32) -> Poly {
        match self {
            LinForm::Single(i) => Poly::var(order, Var::Q(*i)),
            LinForm::Diff { i, j, c } => Poly::var(order, Var::Q(*i))
                .sub(&Poly::term(c.clone(), Monomial::var(Var::Q(*j), 1))),
        }
    }

    fn derivative(&self, k: u32, order: u32) -> CycNum {
        match self {
            LinForm::Single(i) => {
                if *i == k {
                    CycNum::one(order)
                } else {
                    CycNum::zero(order)
                }
            }
            LinForm::Diff { i, j, c } => {
                if *i == k {
                    CycNum::one(order)
                } else if *j == k {
                    c.neg()
                } else {
                    CycNum::zero(order)
                }
            }
        }
    }

    /// Image under a position substitution as `(scalar, normalized form)`:
    /// the substituted factor equals `scalar * form`.
    fn substitute(&self, s: &PosSubst) -> (CycNum, LinForm) {
        match self {
            LinForm::Single(i) => (s.scale_of(*i).clone(), LinForm::Single(s.target_of(*i))),
            LinForm::Diff { i, j, c } => {
                let a = s.target_of(*i);
                let b = s.target_of(*j);
                let ca = s.scale_of(*i).clone();
                let cb = c.mul(s.scale_of(*j));
                // substituted factor: ca*q_a - cb*q_b
                assert_ne!(a, b, "substitution collapsed a difference form");
                if a < b {
                    let coeff = cb.div(&ca).expect("scale is a unit");
                    (ca, LinForm::diff(a, b, coeff))
                } else {
                    let neg_cb = cb.neg();
                    let coeff = ca.div(&neg_cb).expect("scale is a unit").neg();
                    (neg_cb, LinForm::diff(b, a, coeff))
                }
            }
        }
    }

    fn eval(&self, assign: &BTreeMap<Var, CycNum>, order: u32) -> CycNum {
        self.to_poly(order).eval(assign)
    }
}

impl fmt::Display for LinForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinForm::Single(i) => write!(f, "q{}", i),
            LinForm::Diff { i, j, c } => {
                if c.is_one() {
                    write!(f, "(q{} - q{})", i, j)
                } else {
                    write!(f, "(q{} - ({})*q{})", i, c, j)
                }
            }
        }
    }
}

/// A rational function `num / prod(factor^multiplicity)` in reduced form:
/// trial division of the numerator by every denominator factor has been
/// carried to a fixpoint, which makes the representation canonical.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatFun {
    num: Poly,
    den: BTreeMap<LinForm, u32>,
}

impl RatFun {
    pub fn new(num: Poly, den: BTreeMap<LinForm, u32>) -> RatFun {
        let mut r = RatFun { num, den };
        r.normalize();
        r
    }

    pub fn zero(order: u32) -> RatFun {
        RatFun {
            num: Poly::zero(order),
            den: BTreeMap::new(),
        }
    }

    pub fn one(order: u32) -> RatFun {
        RatFun::from_poly(Poly::one(order))
    }

    pub fn constant(c: CycNum) -> RatFun {
        RatFun::from_poly(Poly::constant(c))
    }

    pub fn from_poly(num: Poly) -> RatFun {
        RatFun {
            num,
            den: BTreeMap::new(),
        }
    }

    /// `num / factor`.
    pub fn over_linform(num: Poly, f: LinForm) -> RatFun {
        let mut den = BTreeMap::new();
        den.insert(f, 1);
        RatFun::new(num, den)
    }

    pub fn order(&self) -> u32 {
        self.num.order()
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &BTreeMap<LinForm, u32> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den.clear();
            return;
        }
        let factors: Vec<LinForm> = self.den.keys().cloned().collect();
        for f in factors {
            while self.den.get(&f).copied().unwrap_or(0) > 0 {
                match self.num.divide_by_linform(&f) {
                    Some(q) => {
                        self.num = q;
                        let m = self.den.get_mut(&f).unwrap();
                        *m -= 1;
                        if *m == 0 {
                            self.den.remove(&f);
                        }
                    }
                    None => break,
                }
            }
        }
    }

    pub fn add(&self, other: &RatFun) -> RatFun {
        assert_eq!(self.order(), other.order());
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        // union denominator with per-factor max multiplicity
        let mut union: BTreeMap<LinForm, u32> = self.den.clone();
        for (f, m) in &other.den {
            let e = union.entry(f.clone()).or_insert(0);
            *e = (*e).max(*m);
        }
        let order = self.order();
        let mut lhs = self.num.clone();
        let mut rhs = other.num.clone();
        for (f, m) in &union {
            let need_l = m - self.den.get(f).copied().unwrap_or(0);
            let need_r = m - other.den.get(f).copied().unwrap_or(0);
            let fp = f.to_poly(order);
            for _ in 0..need_l {
                lhs = lhs.mul(&fp);
            }
            for _ in 0..need_r {
                rhs = rhs.mul(&fp);
            }
        }
        RatFun::new(lhs.add(&rhs), union)
    }

    pub fn neg(&self) -> RatFun {
        RatFun {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &RatFun) -> RatFun {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatFun) -> RatFun {
        assert_eq!(self.order(), other.order());
        if self.is_zero() || other.is_zero() {
            return RatFun::zero(self.order());
        }
        let mut den = self.den.clone();
        for (f, m) in &other.den {
            *den.entry(f.clone()).or_insert(0) += m;
        }
        RatFun::new(self.num.mul(&other.num), den)
    }

    pub fn scale(&self, c: &CycNum) -> RatFun {
        if c.is_zero() {
            return RatFun::zero(self.order());
        }
        RatFun {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    /// Partial derivative in `q_i` via the quotient rule over the factored
    /// denominator; the result is re-reduced by trial division.
    pub fn derivative(&self, i: u32) -> RatFun {
        let order = self.order();
        if self.den.is_empty() {
            return RatFun::from_poly(self.num.derivative(i));
        }
        // d/dq_i [N / prod f_k^{m_k}]
        //   = [N' prod f_k - N sum_k m_k f_k' prod_{l != k} f_l] / prod f_k^{m_k+1}
        let mut full = Poly::one(order);
        for f in self.den.keys() {
            full = full.mul(&f.to_poly(order));
        }
        let mut num = self.num.derivative(i).mul(&full);
        for (fk, mk) in &self.den {
            let dfk = fk.derivative(i, order);
            if dfk.is_zero() {
                continue;
            }
            let mut others =
                Poly::constant(dfk.mul(&CycNum::from_int(order, *mk as i64)));
            for fl in self.den.keys() {
                if fl != fk {
                    others = others.mul(&fl.to_poly(order));
                }
            }
            num = num.sub(&self.num.mul(&others));
        }
        let den = self.den.iter().map(|(f, m)| (f.clone(), m + 1)).collect();
        RatFun::new(num, den)
    }

    /// Exact substitution `q_i -> c_i q_{pi(i)}`; denominator factors are
    /// re-normalized and their unit scalars folded into the numerator.
    pub fn substitute(&self, s: &PosSubst) -> RatFun {
        let mut num = self.num.substitute(s);
        let mut den: BTreeMap<LinForm, u32> = BTreeMap::new();
        for (f, m) in &self.den {
            let (scalar, form) = f.substitute(s);
            *den.entry(form).or_insert(0) += m;
            let inv = scalar
                .inverse()
                .expect("unit denominator scalar")
                .pow(*m as i64);
            num = num.scale(&inv);
        }
        RatFun::new(num, den)
    }

    pub fn substitute_param(&self, v: Var, value: &CycNum) -> RatFun {
        let mut r = RatFun {
            num: self.num.substitute_param(v, value),
            den: self.den.clone(),
        };
        r.normalize();
        r
    }

    /// Exact evaluation; `None` when a denominator factor vanishes.
    pub fn eval(&self, assign: &BTreeMap<Var, CycNum>) -> Option<CycNum> {
        let order = self.order();
        let mut den_val = CycNum::one(order);
        for (f, m) in &self.den {
            let v = f.eval(assign, order);
            if v.is_zero() {
                return None;
            }
            den_val = den_val.mul(&v.pow(*m as i64));
        }
        Some(
            self.num
                .eval(assign)
                .mul(&den_val.inverse().expect("nonzero denominator")),
        )
    }

    /// Semantic equality by cross-multiplication to the union denominator.
    pub fn equal(&self, other: &RatFun) -> bool {
        let mut union: BTreeMap<LinForm, u32> = self.den.clone();
        for (f, m) in &other.den {
            let e = union.entry(f.clone()).or_insert(0);
            *e = (*e).max(*m);
        }
        let order = self.order();
        let mut lhs = self.num.clone();
        let mut rhs = other.num.clone();
        for (f, m) in &union {
            let fp = f.to_poly(order);
            for _ in 0..(m - self.den.get(f).copied().unwrap_or(0)) {
                lhs = lhs.mul(&fp);
            }
            for _ in 0..(m - other.den.get(f).copied().unwrap_or(0)) {
                rhs = rhs.mul(&fp);
            }
        }
        lhs == rhs
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        write!(f, "[{}] / ", self.num)?;
        let mut first = true;
        for (form, m) in &self.den {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if *m == 1 {
                write!(f, "{}", form)?;
            } else {
                write!(f, "{}^{}", form, m)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const M: u32 = 12;

    fn qv(i: u32) -> Poly {
        Poly::var(M, Var::Q(i))
    }

    fn cyc(n: i64) -> CycNum {
        CycNum::from_int(M, n)
    }

    fn tau() -> CycNum {
        CycNum::tau(M, 3)
    }

    fn assign(pairs: &[(Var, (i64, i64))]) -> BTreeMap<Var, CycNum> {
        pairs
            .iter()
            .map(|(v, (n, d))| (*v, CycNum::from_ratio(M, *n, *d)))
            .collect()
    }

    #[test]
    fn poly_products() {
        let lhs = qv(1).add(&qv(2)).mul(&qv(1).sub(&qv(2)));
        let rhs = qv(1).mul(&qv(1)).sub(&qv(2).mul(&qv(2)));
        assert_eq!(lhs, rhs);
        assert!(lhs.mul(&Poly::zero(M)).is_zero());
    }

    #[test]
    fn cube_denominator_of_the_second_charge() {
        // (q1 - tau q2)(q1 - tau^2 q2)(q1 - q2) = q1^3 - q2^3 for n = 3
        let t = tau();
        let f1 = qv(1).sub(&Poly::term(t.clone(), Monomial::var(Var::Q(2), 1)));
        let f2 = qv(1).sub(&Poly::term(t.pow(2), Monomial::var(Var::Q(2), 1)));
        let f0 = qv(1).sub(&qv(2));
        let product = f1.mul(&f2).mul(&f0);
        let q1cubed = qv(1).mul(&qv(1)).mul(&qv(1));
        let q2cubed = qv(2).mul(&qv(2)).mul(&qv(2));
        assert_eq!(product, q1cubed.sub(&q2cubed));
    }

    #[test]
    fn derivative_examples() {
        let f = RatFun::from_poly(qv(1).mul(&qv(1)));
        assert_eq!(f.derivative(1), RatFun::from_poly(qv(1).scale(&cyc(2))));

        let g = RatFun::over_linform(Poly::one(M), LinForm::diff(1, 2, cyc(1)));
        let dg = g.derivative(1);
        let mut den = BTreeMap::new();
        den.insert(LinForm::diff(1, 2, cyc(1)), 2);
        assert_eq!(dg, RatFun::new(Poly::constant(cyc(-1)), den));
    }

    /// Independent derivative oracle: substitute `q_i = a + t`, collapse to a
    /// univariate rational function in `t` with dense numerator/denominator,
    /// and differentiate that directly at `t = 0`.
    fn derivative_at_point(f: &RatFun, i: u32, point: &BTreeMap<Var, CycNum>) -> CycNum {
        let order = f.order();
        let eval_poly = |p: &Poly| -> Vec<CycNum> {
            let mut out = vec![CycNum::zero(order)];
            for (m, c) in p.terms() {
                let mut term = vec![c.clone()];
                for (v, e) in m.exponents() {
                    for _ in 0..*e {
                        let factor: Vec<CycNum> = if *v == Var::Q(i) {
                            vec![point[v].clone(), CycNum::one(order)] // a + t
                        } else {
                            vec![point[v].clone()]
                        };
                        let mut next = vec![CycNum::zero(order); term.len() + factor.len() - 1];
                        for (x, tx) in term.iter().enumerate() {
                            for (y, fy) in factor.iter().enumerate() {
                                next[x + y] = next[x + y].add(&tx.mul(fy));
                            }
                        }
                        term = next;
                    }
                }
                if out.len() < term.len() {
                    out.resize(term.len(), CycNum::zero(order));
                }
                for (x, tx) in term.iter().enumerate() {
                    out[x] = out[x].add(tx);
                }
            }
            out
        };
        let num = eval_poly(f.num());
        let mut den = vec![CycNum::one(order)];
        for (form, m) in f.den() {
            for _ in 0..*m {
                let fp = eval_poly(&form.to_poly(order));
                let mut next = vec![CycNum::zero(order); den.len() + fp.len() - 1];
                for (x, tx) in den.iter().enumerate() {
                    for (y, fy) in fp.iter().enumerate() {
                        next[x + y] = next[x + y].add(&tx.mul(fy));
                    }
                }
                den = next;
            }
        }
        // (N' D - N D') / D^2 at t = 0
        let at0 = |p: &[CycNum]| p.first().cloned().unwrap_or_else(|| CycNum::zero(order));
        let d_at0 = |p: &[CycNum]| p.get(1).cloned().unwrap_or_else(|| CycNum::zero(order));
        let n0 = at0(&num);
        let n1 = d_at0(&num);
        let d0 = at0(&den);
        let d1 = d_at0(&den);
        n1.mul(&d0)
            .sub(&n0.mul(&d1))
            .div(&d0.mul(&d0))
            .expect("denominator nonzero at sample point")
    }

    #[test]
    fn derivative_cross_checked_at_rational_points() {
        // the lambda^2 scalar of the second charge at n = 3:
        // f = (q1^4 + 2 q1^3 q2 + 2 q1 q2^3 + q2^4) / (q1^3 - q2^3)^2,
        // with the denominator stored in factored form.
        let t = tau();
        let mut den = BTreeMap::new();
        den.insert(LinForm::diff(1, 2, cyc(1)), 2);
        den.insert(LinForm::diff(1, 2, t.clone()), 2);
        den.insert(LinForm::diff(1, 2, t.pow(2)), 2);
        let num = {
            let q1 = qv(1);
            let q2 = qv(2);
            let q1_3 = q1.mul(&q1).mul(&q1);
            let q2_3 = q2.mul(&q2).mul(&q2);
            q1_3.mul(&q1)
                .add(&q1_3.mul(&q2).scale(&cyc(2)))
                .add(&q1.mul(&q2_3).scale(&cyc(2)))
                .add(&q2_3.mul(&q2))
        };
        let f = RatFun::new(num, den);
        let df = f.derivative(1);
        let samples = [
            (2, 1, 1, 1),
            (3, 1, 1, 2),
            (5, 2, 1, 3),
            (7, 3, 2, 1),
            (9, 4, 5, 7),
        ];
        for (a, b, c, d) in samples {
            let point = assign(&[(Var::Q(1), (a, b)), (Var::Q(2), (c, d))]);
            let direct = df.eval(&point).expect("df defined at sample");
            let oracle = derivative_at_point(&f, 1, &point);
            assert_eq!(direct, oracle);
        }
    }

    #[test]
    fn substitution_examples() {
        let f = RatFun::over_linform(Poly::one(M), LinForm::diff(1, 2, cyc(1)));
        let id = PosSubst::identity(M, 2);
        assert_eq!(f.substitute(&id), f);
        // swap q1 <-> q2 flips the sign of 1/(q1 - q2)
        let swap = PosSubst {
            scale: vec![CycNum::one(M); 2],
            target: vec![2, 1],
        };
        assert_eq!(f.substitute(&swap), f.neg());
        // q1 -> tau^{-1} q1 sends 1/(q1 - tau q2) to tau/(q1 - tau^2 q2);
        // checked through cross-multiplied equality.
        let t = tau();
        let g = RatFun::over_linform(Poly::one(M), LinForm::diff(1, 2, t.clone()));
        let twist = PosSubst {
            scale: vec![t.inverse().unwrap(), CycNum::one(M)],
            target: vec![1, 2],
        };
        let expected =
            RatFun::over_linform(Poly::constant(t.clone()), LinForm::diff(1, 2, t.pow(2)));
        assert!(g.substitute(&twist).equal(&expected));
        assert_eq!(g.substitute(&twist), expected);
    }

    #[test]
    fn addition_examples() {
        let f = RatFun::over_linform(qv(1).add(&qv(2)), LinForm::diff(1, 2, cyc(1)));
        assert!(f.add(&f.neg()).is_zero());
        assert!(f.add(&f.neg()).den().is_empty());
        // 1/(q1-q2) + 1/(q2-q1) = 0: the second summand is -1/(q1-q2)
        let a = RatFun::over_linform(Poly::one(M), LinForm::diff(1, 2, cyc(1)));
        let b = RatFun::over_linform(Poly::constant(cyc(-1)), LinForm::diff(1, 2, cyc(1)));
        assert!(a.add(&b).is_zero());
    }

    #[test]
    fn partial_fraction_split_with_orbit_poles() {
        // 1/((u-a)(u-b)) = 1/(a-b) * (1/(u-a) - 1/(u-b)), homogenized with
        // u = q1 and a, b multiples of q2: a = tau^{-1} * 2, b = tau^{-2} * 3.
        let a = tau().pow(-1).mul(&cyc(2));
        let b = tau().pow(-2).mul(&cyc(3));
        let fa = LinForm::diff(1, 2, a.clone());
        let fb = LinForm::diff(1, 2, b.clone());
        let mut den = BTreeMap::new();
        den.insert(fa.clone(), 1);
        den.insert(fb.clone(), 1);
        let lhs = RatFun::new(Poly::one(M), den);
        let inv_ab = a.sub(&b).inverse().unwrap();
        // the 1/(a-b) of the inhomogeneous identity picks up the
        // homogenizing 1/q2
        let one_over_fa = RatFun::over_linform(Poly::one(M), fa);
        let one_over_fb = RatFun::over_linform(Poly::one(M), fb);
        let scale = RatFun::over_linform(Poly::constant(inv_ab), LinForm::Single(2));
        let rhs = scale.mul(&one_over_fa.sub(&one_over_fb));
        assert!(lhs.equal(&rhs));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn equality_examples() {
        let mut d1 = BTreeMap::new();
        d1.insert(LinForm::diff(1, 2, cyc(1)), 1);
        d1.insert(LinForm::Single(1), 1);
        let mut d2 = BTreeMap::new();
        d2.insert(LinForm::Single(1), 1);
        d2.insert(LinForm::diff(1, 2, cyc(1)), 1);
        let f1 = RatFun::new(qv(2), d1);
        let f2 = RatFun::new(qv(2), d2);
        assert!(f1.equal(&f2));
        // (q1^2 - q2^2)/(q1 - q2) = q1 + q2 via trial division
        let num = qv(1).mul(&qv(1)).sub(&qv(2).mul(&qv(2)));
        let f = RatFun::over_linform(num, LinForm::diff(1, 2, cyc(1)));
        let g = RatFun::from_poly(qv(1).add(&qv(2)));
        assert!(f.equal(&g));
        assert_eq!(f, g);
    }

    #[test]
    fn substitute_is_multiplicative_on_samples() {
        let t = tau();
        let s = PosSubst {
            scale: vec![t.clone(), t.pow(-1)],
            target: vec![2, 1],
        };
        let f = RatFun::over_linform(
            qv(1).add(&qv(2).scale(&cyc(3))),
            LinForm::diff(1, 2, t.clone()),
        );
        let g = RatFun::over_linform(qv(2), LinForm::Single(1));
        let lhs = f.mul(&g).substitute(&s);
        let rhs = f.substitute(&s).mul(&g.substitute(&s));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn leibniz_rule_on_products() {
        let t = tau();
        let f = RatFun::over_linform(qv(2), LinForm::diff(1, 2, t.clone()));
        let g = RatFun::over_linform(qv(1).mul(&qv(1)), LinForm::Single(1));
        let lhs = f.mul(&g).derivative(1);
        let rhs = f.derivative(1).mul(&g).add(&f.mul(&g.derivative(1)));
        assert!(lhs.equal(&rhs));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn evaluation_commutes_with_arithmetic() {
        let t = tau();
        let f = RatFun::over_linform(qv(1).add(&qv(2)), LinForm::diff(1, 2, t.clone()));
        let g = RatFun::over_linform(qv(2), LinForm::Single(1));
        let point = assign(&[(Var::Q(1), (3, 1)), (Var::Q(2), (5, 7))]);
        let fg = f.mul(&g);
        assert_eq!(
            fg.eval(&point).unwrap(),
            f.eval(&point).unwrap().mul(&g.eval(&point).unwrap())
        );
        let fpg = f.add(&g);
        assert_eq!(
            fpg.eval(&point).unwrap(),
            f.eval(&point).unwrap().add(&g.eval(&point).unwrap())
        );
    }

    #[test]
    fn parameters_live_in_numerators() {
        let lam = Poly::var(M, Var::Lambda);
        let f = RatFun::over_linform(lam, LinForm::diff(1, 2, cyc(1)));
        let g = f.substitute_param(Var::Lambda, &cyc(0));
        assert!(g.is_zero());
        let h = f.substitute_param(Var::Lambda, &cyc(7));
        assert_eq!(
            h,
            RatFun::over_linform(Poly::constant(cyc(7)), LinForm::diff(1, 2, cyc(1)))
        );
        assert!(!f
            .substitute_param(Var::Hbar, &CycNum::from_ratio(M, 1, 2))
            .is_zero());
    }
}
