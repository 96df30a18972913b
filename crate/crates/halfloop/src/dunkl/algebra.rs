//! Normal-form arithmetic in the operator algebra generated by positions,
//! momenta and the wreath group.
//!
//! Elements are sums `R(q) * p^alpha * w` with the rational function
//! leftmost, then momenta, then the group element. Products are rewritten
//! eagerly using
//!
//! - `p_i f = f p_i - i hbar (df/dq_i)` (iterated via the Leibniz expansion),
//! - `w f = (w.f) w` with the substitution action of [`WreathElem`],
//! - `w p_j = tau^{a_{pi(j)}} p_{pi(j)} w`,
//!
//! and terms recombine after every rewrite, so cancellation happens as soon
//! as it can. Because reduced rational functions are canonical, an element
//! is zero exactly when its term map is empty.

use super::wreath::WreathElem;
use crate::cyclotomic::{lcm, CycNum};
use crate::polyrat::{LinForm, Monomial, Poly, PosSubst, RatFun, Var};
use num::rational::BigRational;
use std::collections::BTreeMap;
use std::fmt;

/// Shared context: branch count, particle count, field order `lcm(n, 4)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct DunklCtx {
    pub n: u32,
    pub l: usize,
    pub order: u32,
}

impl DunklCtx {
    pub fn new(n: u32, l: usize) -> Self {
        assert!(n >= 1 && l >= 1);
        DunklCtx {
            n,
            l,
            order: lcm(n, 4),
        }
    }

    pub fn tau(&self) -> CycNum {
        CycNum::tau(self.order, self.n)
    }

    pub fn imaginary_unit(&self) -> CycNum {
        CycNum::imaginary_unit(self.order)
    }
}

/// Symbolic or rational value for a coupling parameter.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamSpec {
    Symbolic,
    Rational(BigRational),
}

impl ParamSpec {
    fn factor(&self, ctx: &DunklCtx, var: Var) -> RatFun {
        match self {
            ParamSpec::Symbolic => RatFun::from_poly(Poly::var(ctx.order, var)),
            ParamSpec::Rational(r) => {
                RatFun::constant(CycNum::from_rational(ctx.order, r.clone()))
            }
        }
    }
    pub fn is_zero(&self) -> bool {
        matches!(self, ParamSpec::Rational(r) if num::Zero::is_zero(r))
    }
}

type TermKey = (Vec<u32>, WreathElem);

/// A normal-ordered element `sum R(q) p^alpha w`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AlgebraElem {
    ctx: DunklCtx,
    terms: BTreeMap<TermKey, RatFun>,
}

impl AlgebraElem {
    pub fn zero(ctx: DunklCtx) -> Self {
        AlgebraElem {
            ctx,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ctx: DunklCtx) -> Self {
        AlgebraElem::from_ratfun(ctx, RatFun::one(ctx.order))
    }

    pub fn ctx(&self) -> DunklCtx {
        self.ctx
    }

    pub fn from_ratfun(ctx: DunklCtx, f: RatFun) -> Self {
        let mut e = AlgebraElem::zero(ctx);
        e.insert_add(
            (vec![0; ctx.l], WreathElem::identity(ctx.n, ctx.l)),
            f,
        );
        e
    }

    pub fn from_wreath(ctx: DunklCtx, w: WreathElem) -> Self {
        let mut e = AlgebraElem::zero(ctx);
        e.insert_add((vec![0; ctx.l], w), RatFun::one(ctx.order));
        e
    }

    /// `p_i` as an element (i is 1-based).
    pub fn momentum(ctx: DunklCtx, i: usize) -> Self {
        let mut exps = vec![0; ctx.l];
        exps[i - 1] = 1;
        let mut e = AlgebraElem::zero(ctx);
        e.insert_add(
            (exps, WreathElem::identity(ctx.n, ctx.l)),
            RatFun::one(ctx.order),
        );
        e
    }

    /// `q_i` as a multiplication operator.
    pub fn position(ctx: DunklCtx, i: usize) -> Self {
        AlgebraElem::from_ratfun(ctx, RatFun::from_poly(Poly::var(ctx.order, Var::Q(i as u32))))
    }

    pub fn term(ctx: DunklCtx, f: RatFun, exps: Vec<u32>, w: WreathElem) -> Self {
        let mut e = AlgebraElem::zero(ctx);
        e.insert_add((exps, w), f);
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &RatFun)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn insert_add(&mut self, key: TermKey, f: RatFun) {
        if f.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(e) => {
                let next = e.add(&f);
                if next.is_zero() {
                    self.terms.remove(&key);
                } else {
                    *e = next;
                }
            }
            None => {
                self.terms.insert(key, f);
            }
        }
    }

    pub fn add(&self, other: &AlgebraElem) -> AlgebraElem {
        let mut out = self.clone();
        for (k, f) in &other.terms {
            out.insert_add(k.clone(), f.clone());
        }
        out
    }

    pub fn neg(&self) -> AlgebraElem {
        AlgebraElem {
            ctx: self.ctx,
            terms: self
                .terms
                .iter()
                .map(|(k, f)| (k.clone(), f.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &AlgebraElem) -> AlgebraElem {
        self.add(&other.neg())
    }

    /// Left multiplication by a pure function of the positions.
    pub fn scale_ratfun(&self, f: &RatFun) -> AlgebraElem {
        let mut out = AlgebraElem::zero(self.ctx);
        for (k, g) in &self.terms {
            out.insert_add(k.clone(), f.mul(g));
        }
        out
    }

    pub fn scale(&self, c: &CycNum) -> AlgebraElem {
        let mut out = AlgebraElem::zero(self.ctx);
        for (k, g) in &self.terms {
            out.insert_add(k.clone(), g.scale(c));
        }
        out
    }

    /// `(-i hbar d/dq_i)` applied to a coefficient function.
    fn momentum_derivative(&self, f: &RatFun, i: usize) -> RatFun {
        let minus_i = self.ctx.imaginary_unit().neg();
        f.derivative(i as u32)
            .scale(&minus_i)
            .mul(&RatFun::from_poly(Poly::var(self.ctx.order, Var::Hbar)))
    }

    /// Normal-ordered product.
    pub fn mul(&self, other: &AlgebraElem) -> AlgebraElem {
        let ctx = self.ctx;
        let tau = ctx.tau();
        let mut out = AlgebraElem::zero(ctx);
        for ((alpha, w1), r1) in &self.terms {
            let subst = w1.position_action(ctx.order);
            for ((beta, w2), r2) in &other.terms {
                // move w1 past r2 and p^beta, then merge group parts
                let r2_moved = r2.substitute(&subst);
                let mut phase_exp: i64 = 0;
                let mut beta_moved = vec![0u32; ctx.l];
                for j in 1..=ctx.l {
                    let b = beta[j - 1];
                    if b > 0 {
                        let target = w1.image(j);
                        beta_moved[target - 1] += b;
                        phase_exp += (w1.momentum_phase_exponent(j) as i64) * (b as i64);
                    }
                }
                let w = w1.mul(w2);
                let phase = tau.pow(phase_exp);
                // p^alpha past r2_moved via the Leibniz expansion
                let mut pending: Vec<(Vec<u32>, RatFun)> =
                    vec![(alpha.clone(), r2_moved.scale(&phase))];
                for i in 1..=ctx.l {
                    let a_i = alpha[i - 1];
                    if a_i == 0 {
                        continue;
                    }
                    let mut next: Vec<(Vec<u32>, RatFun)> = Vec::new();
                    for (exps, f) in pending {
                        // expand p_i^{a_i} f = sum_g C(a_i, g) D^{a_i - g}(f) p_i^g
                        let mut derivs = vec![f.clone()];
                        for _ in 0..a_i {
                            let last = derivs.last().unwrap();
                            derivs.push(self.momentum_derivative(last, i));
                        }
                        for g in 0..=a_i {
                            let c = binom_u32(a_i, g);
                            let coeff = derivs[(a_i - g) as usize]
                                .scale(&CycNum::from_int(ctx.order, c));
                            if coeff.is_zero() {
                                continue;
                            }
                            let mut e = exps.clone();
                            e[i - 1] = g;
                            next.push((e, coeff));
                        }
                    }
                    pending = next;
                }
                for (gamma, f) in pending {
                    let full = r1.mul(&f);
                    if full.is_zero() {
                        continue;
                    }
                    let mut exps = gamma;
                    for (slot, b) in beta_moved.iter().enumerate() {
                        exps[slot] += b;
                    }
                    out.insert_add((exps, w.clone()), full);
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &AlgebraElem) -> AlgebraElem {
        self.mul(other).sub(&other.mul(self))
    }

    /// Replace a parameter (`lambda`, `mu_k` or `hbar`) by a field value in
    /// every coefficient. Momentum symbols are untouched.
    pub fn substitute_param(&self, v: Var, value: &CycNum) -> AlgebraElem {
        let mut out = AlgebraElem::zero(self.ctx);
        for (k, f) in &self.terms {
            out.insert_add(k.clone(), f.substitute_param(v, value));
        }
        out
    }

    /// Apply to a position-space wavefunction: group elements act by
    /// substitution, momenta by `-i hbar d/dq`, coefficients by
    /// multiplication. This path never multiplies algebra elements, so it is
    /// an independent route through every operator.
    pub fn apply(&self, psi: &RatFun) -> RatFun {
        let ctx = self.ctx;
        let mut out = RatFun::zero(ctx.order);
        for ((alpha, w), r) in &self.terms {
            let mut cur = psi.substitute(&w.position_action(ctx.order));
            for i in 1..=ctx.l {
                for _ in 0..alpha[i - 1] {
                    cur = self.momentum_derivative(&cur, i);
                }
            }
            out = out.add(&r.mul(&cur));
        }
        out
    }

    /// First term rendered, for failure witnesses.
    pub fn first_term_rendered(&self) -> Option<String> {
        self.terms
            .iter()
            .next()
            .map(|(k, f)| render_term(k, f))
    }

    /// Deterministic plain-text rendering, one term per line.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0\n".to_string();
        }
        let mut out = String::new();
        for (k, f) in &self.terms {
            out.push_str(&render_term(k, f));
            out.push('\n');
        }
        out
    }
}

fn render_term(key: &TermKey, f: &RatFun) -> String {
    let (exps, w) = key;
    let mut mom = String::new();
    for (i, e) in exps.iter().enumerate() {
        if *e == 0 {
            continue;
        }
        if !mom.is_empty() {
            mom.push('*');
        }
        if *e == 1 {
            mom.push_str(&format!("p{}", i + 1));
        } else {
            mom.push_str(&format!("p{}^{}", i + 1, e));
        }
    }
    if mom.is_empty() {
        mom.push('1');
    }
    format!("{} | {} | {}", mom, w, f)
}

fn binom_u32(n: u32, k: u32) -> i64 {
    let mut acc = 1i64;
    for i in 0..k {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    acc
}

impl fmt::Display for AlgebraElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// The star-graph Dunkl operator
/// `d_i = p_i + lambda sum_{j!=i} sum_k (1/(q_i - tau^k q_j)) Q_i^k P_ij Q_i^{-k}
///      + sum_k (mu_k / q_i) Q_i^k`,
/// with the group words pre-reduced to normal form.
pub fn dunkl_operator(
    ctx: DunklCtx,
    lambda: &ParamSpec,
    mu: &[ParamSpec],
    i: usize,
) -> AlgebraElem {
    assert!(i >= 1 && i <= ctx.l);
    assert_eq!(mu.len(), ctx.n as usize);
    let tau = ctx.tau();
    let mut d = AlgebraElem::momentum(ctx, i);
    let lambda_factor = lambda.factor(&ctx, Var::Lambda);
    if !lambda_factor.is_zero() {
        for j in 1..=ctx.l {
            if j == i {
                continue;
            }
            for k in 0..ctx.n as i64 {
                // 1/(q_i - tau^k q_j), normalized so the smaller index leads
                let coeff = if i < j {
                    RatFun::over_linform(
                        Poly::one(ctx.order),
                        LinForm::diff(i as u32, j as u32, tau.pow(k)),
                    )
                } else {
                    // q_i - tau^k q_j = -tau^k (q_j - tau^{-k} q_i)
                    RatFun::over_linform(
                        Poly::constant(tau.pow(-k).neg()),
                        LinForm::diff(j as u32, i as u32, tau.pow(-k)),
                    )
                };
                let w = WreathElem::rotation(ctx.n, ctx.l, i, k)
                    .mul(&WreathElem::transposition(ctx.n, ctx.l, i, j))
                    .mul(&WreathElem::rotation(ctx.n, ctx.l, i, -k));
                d = d.add(
                    &AlgebraElem::term(ctx, coeff.mul(&lambda_factor), vec![0; ctx.l], w),
                );
            }
        }
    }
    for (k, mu_k) in mu.iter().enumerate() {
        if mu_k.is_zero() {
            continue;
        }
        let factor = mu_k.factor(&ctx, Var::Mu(k as u32));
        let coeff = RatFun::over_linform(Poly::one(ctx.order), LinForm::Single(i as u32))
            .mul(&factor);
        let w = WreathElem::rotation(ctx.n, ctx.l, i, k as i64);
        d = d.add(&AlgebraElem::term(ctx, coeff, vec![0; ctx.l], w));
    }
    d
}

/// `I^(k) = sum_i d_i^k` in normal form.
pub fn power_sum(ctx: DunklCtx, lambda: &ParamSpec, mu: &[ParamSpec], k: u32) -> AlgebraElem {
    assert!(k >= 1);
    let mut total = AlgebraElem::zero(ctx);
    for i in 1..=ctx.l {
        let d = dunkl_operator(ctx, lambda, mu, i);
        let mut acc = d.clone();
        for _ in 1..k {
            acc = acc.mul(&d);
        }
        total = total.add(&acc);
    }
    total
}

/// Pairwise commutativity of the Dunkl operators with fully symbolic
/// parameters; reports the first nonzero term on failure.
pub fn verify_dunkl_commutativity(
    ctx: DunklCtx,
    lambda: &ParamSpec,
    mu: &[ParamSpec],
) -> Result<(), String> {
    let ops: Vec<AlgebraElem> = (1..=ctx.l)
        .map(|i| dunkl_operator(ctx, lambda, mu, i))
        .collect();
    for i in 0..ops.len() {
        for j in (i + 1)..ops.len() {
            let c = ops[i].commutator(&ops[j]);
            if !c.is_zero() {
                return Err(format!(
                    "[d_{}, d_{}] != 0; first term: {}",
                    i + 1,
                    j + 1,
                    c.first_term_rendered().unwrap_or_default()
                ));
            }
        }
    }
    Ok(())
}

/// Evaluator route for the same fact: apply `[d_i, d_j]` to sample
/// wavefunctions term by term (no algebra products involved).
pub fn verify_commutativity_on_wavefunctions(
    ctx: DunklCtx,
    lambda: &ParamSpec,
    mu: &[ParamSpec],
    samples: usize,
) -> Result<(), String> {
    let ops: Vec<AlgebraElem> = (1..=ctx.l)
        .map(|i| dunkl_operator(ctx, lambda, mu, i))
        .collect();
    // deterministic pseudo-random monomials
    let mut seed = 0x5851f42d4c957f2du64;
    let mut next = move || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (seed >> 33) as u32
    };
    for s in 0..samples {
        let mut mono = Monomial::one();
        for i in 1..=ctx.l {
            mono = mono.mul(&Monomial::var(Var::Q(i as u32), next() % 4));
        }
        let coeff = CycNum::from_int(ctx.order, (next() % 5) as i64 + 1);
        let psi = RatFun::from_poly(Poly::term(coeff, mono));
        for i in 0..ops.len() {
            for j in (i + 1)..ops.len() {
                let lhs = ops[i].apply(&ops[j].apply(&psi));
                let rhs = ops[j].apply(&ops[i].apply(&psi));
                if !lhs.equal(&rhs) {
                    return Err(format!(
                        "[d_{}, d_{}] psi != 0 for sample {}",
                        i + 1,
                        j + 1,
                        s
                    ));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym() -> ParamSpec {
        ParamSpec::Symbolic
    }

    fn mu_zero(n: u32) -> Vec<ParamSpec> {
        vec![ParamSpec::Rational(BigRational::from_integer(0.into())); n as usize]
    }

    fn mu_sym(n: u32) -> Vec<ParamSpec> {
        vec![ParamSpec::Symbolic; n as usize]
    }

    #[test]
    fn canonical_commutator_with_position() {
        // [p_1, q_1] = -i hbar
        let ctx = DunklCtx::new(1, 2);
        let p1 = AlgebraElem::momentum(ctx, 1);
        let q1 = AlgebraElem::position(ctx, 1);
        let c = p1.commutator(&q1);
        let minus_i_hbar = AlgebraElem::from_ratfun(
            ctx,
            RatFun::from_poly(
                Poly::var(ctx.order, Var::Hbar).scale(&ctx.imaginary_unit().neg()),
            ),
        );
        assert_eq!(c, minus_i_hbar);
        // [p_1, q_2] = 0
        let q2 = AlgebraElem::position(ctx, 2);
        assert!(p1.commutator(&q2).is_zero());
    }

    #[test]
    fn derivative_of_inverse_difference()  {
        // [p_1, 1/(q1 - q2)] = i hbar / (q1 - q2)^2
        let ctx = DunklCtx::new(1, 2);
        let p1 = AlgebraElem::momentum(ctx, 1);
        let f = AlgebraElem::from_ratfun(
            ctx,
            RatFun::over_linform(
                Poly::one(ctx.order),
                LinForm::diff(1, 2, CycNum::one(ctx.order)),
            ),
        );
        let c = p1.commutator(&f);
        let mut den = BTreeMap::new();
        den.insert(LinForm::diff(1, 2, CycNum::one(ctx.order)), 2);
        let expected = AlgebraElem::from_ratfun(
            ctx,
            RatFun::new(
                Poly::var(ctx.order, Var::Hbar).scale(&ctx.imaginary_unit()),
                den,
            ),
        );
        assert_eq!(c, expected);
    }

    #[test]
    fn rotation_momentum_exchange() {
        // Q_1 p_1 = tau p_1 Q_1
        let ctx = DunklCtx::new(3, 2);
        let q1 = AlgebraElem::from_wreath(ctx, WreathElem::rotation(3, 2, 1, 1));
        let p1 = AlgebraElem::momentum(ctx, 1);
        let lhs = q1.mul(&p1);
        let rhs = p1.mul(&q1).scale(&ctx.tau());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn group_sector_reduces_to_wreath_multiplication() {
        let ctx = DunklCtx::new(3, 3);
        let words = [
            WreathElem::rotation(3, 3, 1, 1).mul(&WreathElem::transposition(3, 3, 1, 2)),
            WreathElem::transposition(3, 3, 2, 3),
            WreathElem::rotation(3, 3, 3, 2),
        ];
        for w1 in &words {
            for w2 in &words {
                let a = AlgebraElem::from_wreath(ctx, w1.clone());
                let b = AlgebraElem::from_wreath(ctx, w2.clone());
                assert_eq!(
                    a.mul(&b),
                    AlgebraElem::from_wreath(ctx, w1.mul(w2))
                );
            }
        }
    }

    #[test]
    fn associativity_on_random_elements() {
        let ctx = DunklCtx::new(2, 2);
        let d1 = dunkl_operator(ctx, &sym(), &mu_sym(2), 1);
        let q1 = AlgebraElem::position(ctx, 1);
        let p2 = AlgebraElem::momentum(ctx, 2);
        let w = AlgebraElem::from_wreath(ctx, WreathElem::rotation(2, 2, 2, 1));
        let a = d1.add(&q1);
        let b = p2.add(&w);
        let c = d1.mul(&p2).add(&q1);
        let lhs = a.mul(&b).mul(&c);
        let rhs = a.mul(&b.mul(&c));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn rank_one_dunkl_reduces_to_line_operator() {
        // n = 1, mu absent: d_i = p_i + lambda sum_{j != i} (1/(q_i - q_j)) P_ij
        let ctx = DunklCtx::new(1, 3);
        let d1 = dunkl_operator(ctx, &sym(), &mu_zero(1), 1);
        let mut expected = AlgebraElem::momentum(ctx, 1);
        for j in [2usize, 3] {
            let coeff = RatFun::over_linform(
                Poly::var(ctx.order, Var::Lambda),
                LinForm::diff(1, j as u32, CycNum::one(ctx.order)),
            );
            expected = expected.add(&AlgebraElem::term(
                ctx,
                coeff,
                vec![0; 3],
                WreathElem::transposition(1, 3, 1, j),
            ));
        }
        assert_eq!(d1, expected);
        // lambda = 0, mu = 0 leaves the bare momentum
        let zero = ParamSpec::Rational(BigRational::from_integer(0.into()));
        assert_eq!(
            dunkl_operator(ctx, &zero, &mu_zero(1), 1),
            AlgebraElem::momentum(ctx, 1)
        );
    }

    #[test]
    fn single_particle_two_branches() {
        // n = 2, L = 1: d_1 = p_1 + (mu_0 + mu_1 Q_1)/q_1
        let ctx = DunklCtx::new(2, 1);
        let d = dunkl_operator(ctx, &sym(), &mu_sym(2), 1);
        let mut expected = AlgebraElem::momentum(ctx, 1);
        for k in 0..2u32 {
            let coeff = RatFun::over_linform(
                Poly::var(ctx.order, Var::Mu(k)),
                LinForm::Single(1),
            );
            expected = expected.add(&AlgebraElem::term(
                ctx,
                coeff,
                vec![0],
                WreathElem::rotation(2, 1, 1, k as i64),
            ));
        }
        assert_eq!(d, expected);
    }

    #[test]
    fn commutativity_small_specs() {
        verify_dunkl_commutativity(DunklCtx::new(1, 3), &sym(), &mu_sym(1)).unwrap();
        verify_dunkl_commutativity(DunklCtx::new(3, 2), &sym(), &mu_sym(3)).unwrap();
        verify_dunkl_commutativity(DunklCtx::new(2, 3), &sym(), &mu_sym(2)).unwrap();
    }

    #[test]
    fn commutativity_via_evaluator() {
        verify_commutativity_on_wavefunctions(DunklCtx::new(2, 2), &sym(), &mu_sym(2), 5)
            .unwrap();
    }

    #[test]
    fn apply_identity_and_linearity() {
        let ctx = DunklCtx::new(3, 2);
        let psi = RatFun::over_linform(
            Poly::var(ctx.order, Var::Q(1)),
            LinForm::diff(1, 2, ctx.tau()),
        );
        assert!(AlgebraElem::one(ctx).apply(&psi).equal(&psi));
        let d = dunkl_operator(ctx, &sym(), &mu_sym(3), 1);
        let two_psi = psi.scale(&CycNum::from_int(ctx.order, 2));
        assert!(d
            .apply(&two_psi)
            .equal(&d.apply(&psi).scale(&CycNum::from_int(ctx.order, 2))));
    }

    #[test]
    fn apply_agrees_with_normal_form_product() {
        // (A B) psi = A (B psi) for operators with nontrivial rewrites
        let ctx = DunklCtx::new(3, 2);
        let a = dunkl_operator(ctx, &sym(), &mu_sym(3), 1);
        let b = dunkl_operator(ctx, &sym(), &mu_sym(3), 2);
        let psi = RatFun::from_poly(
            Poly::var(ctx.order, Var::Q(1)).mul(&Poly::var(ctx.order, Var::Q(2))),
        );
        let lhs = a.mul(&b).apply(&psi);
        let rhs = a.apply(&b.apply(&psi));
        assert!(lhs.equal(&rhs));
    }
}
