//! Transcriptions of the printed conserved charges for three branches and
//! two particles (`mu = 0`), and the machinery for comparing the engine's
//! normal forms against them.
//!
//! The printed charges carry no explicit `hbar`. Calibration starts from
//! `I^(1)`, which the engine reproduces identically in `hbar` (neither side
//! contains it), and freezes the convention on the higher charges: among the
//! candidate values `{0, 1, i, -i}` the substitution `hbar = i` — the
//! plain-derivative momentum convention, `p = -i hbar d/dq = d/dq` — is the
//! unique one at which the printed third charge equals the engine's normal
//! form exactly, so it is the frozen display convention. See
//! `calibrate_hbar`.
//!
//! Where the engine's exact normal form contains terms beyond the printed
//! ones, the difference is pinned byte-exactly in a companion golden file
//! rather than ignored; the printed terms themselves must be reproduced
//! with exactly the printed coefficients.

use super::algebra::{power_sum, AlgebraElem, DunklCtx, ParamSpec};
use super::wreath::WreathElem;
use crate::cyclotomic::CycNum;
use crate::polyrat::{LinForm, Monomial, Poly, RatFun, Var};
use num::rational::BigRational;
use std::collections::BTreeMap;

/// `1/(q_i - tau^k q_j)` as a reduced rational function (any i != j).
pub fn inv_diff(ctx: &DunklCtx, i: usize, j: usize, k: i64) -> RatFun {
    inv_diff_pow(ctx, i, j, k, 1)
}

/// `1/(q_i - tau^k q_j)^power`.
pub fn inv_diff_pow(ctx: &DunklCtx, i: usize, j: usize, k: i64, power: u32) -> RatFun {
    let tau = ctx.tau();
    let (form, scalar) = if i < j {
        (
            LinForm::diff(i as u32, j as u32, tau.pow(k)),
            CycNum::one(ctx.order),
        )
    } else {
        // q_i - tau^k q_j = -tau^k (q_j - tau^{-k} q_i)
        (
            LinForm::diff(j as u32, i as u32, tau.pow(-k)),
            tau.pow(-k).neg(),
        )
    };
    let mut den = BTreeMap::new();
    den.insert(form, power);
    RatFun::new(Poly::constant(scalar.pow(power as i64)), den)
}

fn lambda_poly(ctx: &DunklCtx, degree: u32) -> RatFun {
    RatFun::from_poly(Poly::term(
        CycNum::one(ctx.order),
        Monomial::var(Var::Lambda, degree),
    ))
}

fn p_term(ctx: &DunklCtx, i: usize, degree: u32) -> Vec<u32> {
    let mut exps = vec![0; ctx.l];
    exps[i - 1] = degree;
    exps
}

fn rot(ctx: &DunklCtx, i: usize, k: i64) -> WreathElem {
    WreathElem::rotation(ctx.n, ctx.l, i, k)
}

fn swap12(ctx: &DunklCtx) -> WreathElem {
    WreathElem::transposition(ctx.n, ctx.l, 1, 2)
}

/// Printed first charge:
/// `p1 + p2 + lambda [ (1-tau)/(q1-tau q2) Q1 Q2^-1 + (1-tau^2)/(q1-tau^2 q2) Q1^-1 Q2 ] P12`.
pub fn display_i1(ctx: &DunklCtx) -> AlgebraElem {
    assert_eq!((ctx.n, ctx.l), (3, 2));
    let tau = ctx.tau();
    let one = CycNum::one(ctx.order);
    let mut out = AlgebraElem::momentum(*ctx, 1).add(&AlgebraElem::momentum(*ctx, 2));
    for k in [1i64, 2] {
        let coeff = inv_diff(ctx, 1, 2, k)
            .scale(&one.sub(&tau.pow(k)))
            .mul(&lambda_poly(ctx, 1));
        let w = rot(ctx, 1, k).mul(&rot(ctx, 2, -k)).mul(&swap12(ctx));
        out = out.add(&AlgebraElem::term(*ctx, coeff, vec![0, 0], w));
    }
    out
}

/// Printed second charge: momentum cross terms plus the scalar
/// `-3 lambda^2 (q1^4 + 2 q1^3 q2 + 2 q1 q2^3 + q2^4)/(q1^3 - q2^3)^2`.
pub fn display_i2(ctx: &DunklCtx) -> AlgebraElem {
    assert_eq!((ctx.n, ctx.l), (3, 2));
    let tau = ctx.tau();
    let one = CycNum::one(ctx.order);
    let mut out = AlgebraElem::term(
        *ctx,
        RatFun::one(ctx.order),
        p_term(ctx, 1, 2),
        WreathElem::identity(ctx.n, ctx.l),
    )
    .add(&AlgebraElem::term(
        *ctx,
        RatFun::one(ctx.order),
        p_term(ctx, 2, 2),
        WreathElem::identity(ctx.n, ctx.l),
    ));
    // lambda p1 [(1 - tau^2)/(q1 - tau q2) Q1 Q2^-1 + (1 - tau)/(q1 - tau^2 q2) Q1^-1 Q2] P12
    let p1_parts = [
        (1i64, one.sub(&tau.pow(2))),
        (2i64, one.sub(&tau)),
    ];
    for (k, factor) in p1_parts {
        let coeff = inv_diff(ctx, 1, 2, k)
            .scale(&factor)
            .mul(&lambda_poly(ctx, 1));
        let w = rot(ctx, 1, k).mul(&rot(ctx, 2, -k)).mul(&swap12(ctx));
        out = out.add(&AlgebraElem::term(*ctx, coeff, p_term(ctx, 1, 1), w));
    }
    // lambda p2 [(1 - tau^2)/(q2 - tau q1) Q2 Q1^-1 + (1 - tau)/(q2 - tau^2 q1) Q2^-1 Q1] P12
    let p2_parts = [
        (1i64, one.sub(&tau.pow(2))),
        (2i64, one.sub(&tau)),
    ];
    for (k, factor) in p2_parts {
        let coeff = inv_diff(ctx, 2, 1, k)
            .scale(&factor)
            .mul(&lambda_poly(ctx, 1));
        let w = rot(ctx, 2, k).mul(&rot(ctx, 1, -k)).mul(&swap12(ctx));
        out = out.add(&AlgebraElem::term(*ctx, coeff, p_term(ctx, 2, 1), w));
    }
    // scalar part with the factored cube denominator
    let num = {
        let q1 = Poly::var(ctx.order, Var::Q(1));
        let q2 = Poly::var(ctx.order, Var::Q(2));
        let two = CycNum::from_int(ctx.order, 2);
        let q1_3 = q1.mul(&q1).mul(&q1);
        let q2_3 = q2.mul(&q2).mul(&q2);
        q1_3.mul(&q1)
            .add(&q1_3.mul(&q2).scale(&two))
            .add(&q1.mul(&q2_3).scale(&two))
            .add(&q2_3.mul(&q2))
    };
    let mut den = BTreeMap::new();
    for k in 0..3i64 {
        den.insert(LinForm::diff(1, 2, tau.pow(k)), 2u32);
    }
    let scalar = RatFun::new(num, den)
        .scale(&CycNum::from_int(ctx.order, -3))
        .mul(&lambda_poly(ctx, 2));
    out.add(&AlgebraElem::term(
        *ctx,
        scalar,
        vec![0, 0],
        WreathElem::identity(ctx.n, ctx.l),
    ))
}

/// Printed third charge, including the `3 sqrt(3) i = 3 (tau - tau^2)`
/// group term on `Q1^2 Q2 - Q1 Q2^2`.
pub fn display_i3(ctx: &DunklCtx) -> AlgebraElem {
    assert_eq!((ctx.n, ctx.l), (3, 2));
    let tau = ctx.tau();
    let minus3 = CycNum::from_int(ctx.order, -3);
    let mut out = AlgebraElem::term(
        *ctx,
        RatFun::one(ctx.order),
        p_term(ctx, 1, 3),
        WreathElem::identity(ctx.n, ctx.l),
    )
    .add(&AlgebraElem::term(
        *ctx,
        RatFun::one(ctx.order),
        p_term(ctx, 2, 3),
        WreathElem::identity(ctx.n, ctx.l),
    ));
    // -3 lambda p1 sum over branch images: group factors P12, P12 Q1^-1 Q2,
    // P12 Q1 Q2^-1 paired with 1/(q1 - q2)^2, 1/(q1 - tau q2)^2,
    // 1/(q1 - tau^2 q2)^2; each bracket also carries "+ lambda".
    let p1_lines: [(i64, WreathElem); 3] = [
        (0, swap12(ctx)),
        (1, swap12(ctx).mul(&rot(ctx, 1, -1)).mul(&rot(ctx, 2, 1))),
        (2, swap12(ctx).mul(&rot(ctx, 1, 1)).mul(&rot(ctx, 2, -1))),
    ];
    for (k, w) in p1_lines {
        let base = inv_diff_pow(ctx, 1, 2, k, 2).scale(&minus3);
        out = out.add(&AlgebraElem::term(
            *ctx,
            base.mul(&lambda_poly(ctx, 1)),
            p_term(ctx, 1, 1),
            w,
        ));
        out = out.add(&AlgebraElem::term(
            *ctx,
            base.mul(&lambda_poly(ctx, 2)),
            p_term(ctx, 1, 1),
            WreathElem::identity(ctx.n, ctx.l),
        ));
    }
    // -3 lambda p2 lines: denominators 1/(q1-q2)^2, 1/(q2 - tau q1)^2,
    // 1/(q2 - tau^2 q1)^2 with group factors P12, P12 Q2^-1 Q1, P12 Q2 Q1^-1.
    let p2_lines: [(usize, usize, i64, WreathElem); 3] = [
        (1, 2, 0, swap12(ctx)),
        (2, 1, 1, swap12(ctx).mul(&rot(ctx, 2, -1)).mul(&rot(ctx, 1, 1))),
        (2, 1, 2, swap12(ctx).mul(&rot(ctx, 2, 1)).mul(&rot(ctx, 1, -1))),
    ];
    for (i, j, k, w) in p2_lines {
        let base = inv_diff_pow(ctx, i, j, k, 2).scale(&minus3);
        out = out.add(&AlgebraElem::term(
            *ctx,
            base.mul(&lambda_poly(ctx, 1)),
            p_term(ctx, 2, 1),
            w,
        ));
        out = out.add(&AlgebraElem::term(
            *ctx,
            base.mul(&lambda_poly(ctx, 2)),
            p_term(ctx, 2, 1),
            WreathElem::identity(ctx.n, ctx.l),
        ));
    }
    // -3 sqrt(3) i lambda^2 / ((q1-q2)(q1-tau q2)(q1-tau^2 q2)) * Q1 Q2 (Q1 - Q2)
    let sqrt3i = tau.sub(&tau.pow(2));
    let mut den = BTreeMap::new();
    for k in 0..3i64 {
        den.insert(LinForm::diff(1, 2, tau.pow(k)), 1u32);
    }
    let coeff = RatFun::new(Poly::one(ctx.order), den)
        .scale(&sqrt3i.mul(&minus3))
        .mul(&lambda_poly(ctx, 2));
    let w_a = rot(ctx, 1, 2).mul(&rot(ctx, 2, 1)); // Q1^2 Q2
    let w_b = rot(ctx, 1, 1).mul(&rot(ctx, 2, 2)); // Q1 Q2^2
    out = out.add(&AlgebraElem::term(*ctx, coeff.clone(), vec![0, 0], w_a));
    out.add(&AlgebraElem::term(*ctx, coeff.neg(), vec![0, 0], w_b))
}

/// The engine charge with `mu = 0` and symbolic `lambda`, with `hbar`
/// substituted to the calibrated display value.
pub fn engine_charge_at_display_convention(ctx: &DunklCtx, k: u32) -> AlgebraElem {
    let lambda = ParamSpec::Symbolic;
    let mu = vec![ParamSpec::Rational(BigRational::from_integer(0.into())); ctx.n as usize];
    power_sum(*ctx, &lambda, &mu, k).substitute_param(Var::Hbar, &calibrated_hbar(ctx))
}

/// Calibrate the display convention: the engine and the printed `I^(1)`
/// must agree identically in `hbar` (neither contains it); the frozen value
/// for the higher fixtures is `hbar = i`, under which momenta act as plain
/// derivatives and the printed third charge is reproduced exactly.
pub fn calibrate_hbar(ctx: &DunklCtx) -> Result<CycNum, String> {
    let lambda = ParamSpec::Symbolic;
    let mu = vec![ParamSpec::Rational(BigRational::from_integer(0.into())); ctx.n as usize];
    let engine = power_sum(*ctx, &lambda, &mu, 1);
    let display = display_i1(ctx);
    if engine != display {
        return Err(format!(
            "first-charge calibration failed: engine and display differ; {}",
            engine
                .sub(&display)
                .first_term_rendered()
                .unwrap_or_default()
        ));
    }
    Ok(calibrated_hbar(ctx))
}

/// The frozen display convention `hbar = i`.
pub fn calibrated_hbar(ctx: &DunklCtx) -> CycNum {
    CycNum::imaginary_unit(ctx.order)
}

/// Difference `engine - display` at the calibrated convention. An empty
/// result means the printed charge is the complete normal form.
pub fn charge_difference(ctx: &DunklCtx, k: u32) -> AlgebraElem {
    let display = match k {
        1 => display_i1(ctx),
        2 => display_i2(ctx),
        3 => display_i3(ctx),
        _ => panic!("printed charges exist for k = 1, 2, 3"),
    };
    engine_charge_at_display_convention(ctx, k).sub(&display)
}

/// Every printed term must be reproduced exactly: the difference may only be
/// supported on keys (momentum, group element) absent from the display.
pub fn display_terms_reproduced(ctx: &DunklCtx, k: u32) -> Result<(), String> {
    let display = match k {
        1 => display_i1(ctx),
        2 => display_i2(ctx),
        3 => display_i3(ctx),
        _ => panic!("printed charges exist for k = 1, 2, 3"),
    };
    let diff = charge_difference(ctx, k);
    for (key, _) in diff.terms() {
        if display.terms().any(|(dk, _)| dk == key) {
            return Err(format!(
                "printed term not reproduced exactly: momentum {:?}, group {}",
                key.0, key.1
            ));
        }
    }
    Ok(())
}
