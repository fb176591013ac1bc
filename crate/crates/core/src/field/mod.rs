//! Exact arithmetic over a parameter field ℚ(g₁,…,g_k).
//!
//! Generators come in three kinds. RATIONAL generators are named constants.
//! GENERIC generators are treated as algebraically independent
//! indeterminates: values are reduced rational functions in them, zero
//! testing is polynomial identity, and signs are read off at a rational
//! witness point. ALGEBRAIC generators carry a minimal polynomial and an
//! isolating interval; values are reduced modulo the minimal polynomial and
//! signs come from interval evaluation with escalating precision.

mod algebraic;
mod expr;
mod interval;
mod poly;
mod upoly;

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use algebraic::AlgElem;
pub use expr::{parse_expr, parse_univariate, ExprError};
pub use interval::Interval;
pub use upoly::UPoly;

use algebraic::AlgTower;
use poly::{gcd, Mono, Poly};

pub type Rational = num_rational::BigRational;

pub const DEFAULT_PRECISION_CAP_BITS: u32 = 4096;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot determine the sign of {expr}: the generic witnesses satisfy an algebraic relation or the precision cap was reached; declare the generator as algebraic")]
    IndeterminateSign { expr: String },
    #[error("invalid parameter context: {0}")]
    InvalidContext(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    Rational(Rational),
    /// Algebraically independent indeterminate with an exact rational witness.
    Generic { witness: Rational, contraction: bool },
    Algebraic {
        minpoly: UPoly,
        interval: (Rational, Rational),
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub kind: GeneratorKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Constant(usize),
    Generic(usize),
    Algebraic(usize),
}

/// A declared polynomial inequality, kept for reporting only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assumption {
    pub text: String,
}

pub struct ParameterContext {
    generators: Vec<Generator>,
    slots: Vec<Slot>,
    witnesses: Vec<Rational>,
    tower: AlgTower,
    assumptions: Vec<Assumption>,
    warnings: Vec<String>,
}

impl fmt::Debug for ParameterContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParameterContext")
            .field("generators", &self.generators)
            .field("assumptions", &self.assumptions)
            .finish()
    }
}

#[derive(Default)]
pub struct ContextBuilder {
    generators: Vec<Generator>,
    assumptions: Vec<Assumption>,
    precision_cap_bits: Option<u32>,
}

impl ContextBuilder {
    pub fn rational(mut self, name: &str, value: Rational) -> Self {
        self.generators.push(Generator {
            name: name.to_string(),
            kind: GeneratorKind::Rational(value),
        });
        self
    }

    /// A generic generator used as a contraction ratio magnitude; its witness
    /// must lie in (0,1).
    pub fn generic(mut self, name: &str, witness: Rational) -> Self {
        self.generators.push(Generator {
            name: name.to_string(),
            kind: GeneratorKind::Generic {
                witness,
                contraction: true,
            },
        });
        self
    }

    pub fn generic_unbounded(mut self, name: &str, witness: Rational) -> Self {
        self.generators.push(Generator {
            name: name.to_string(),
            kind: GeneratorKind::Generic {
                witness,
                contraction: false,
            },
        });
        self
    }

    pub fn algebraic(mut self, name: &str, minpoly: UPoly, lo: Rational, hi: Rational) -> Self {
        self.generators.push(Generator {
            name: name.to_string(),
            kind: GeneratorKind::Algebraic {
                minpoly,
                interval: (lo, hi),
            },
        });
        self
    }

    pub fn generator(mut self, g: Generator) -> Self {
        self.generators.push(g);
        self
    }

    pub fn assume(mut self, text: &str) -> Self {
        self.assumptions.push(Assumption {
            text: text.to_string(),
        });
        self
    }

    pub fn precision_cap_bits(mut self, bits: u32) -> Self {
        self.precision_cap_bits = Some(bits);
        self
    }

    pub fn build(self) -> Result<Arc<ParameterContext>, FieldError> {
        let mut slots = Vec::new();
        let mut witnesses = Vec::new();
        let mut alg = Vec::new();
        let mut warnings = Vec::new();
        for (i, g) in self.generators.iter().enumerate() {
            if g.name.is_empty()
                || !g.name.chars().next().unwrap().is_alphabetic()
                || !g.name.chars().all(|c| c.is_alphanumeric() || c == '_')
            {
                return Err(FieldError::InvalidContext(format!(
                    "invalid generator name '{}'",
                    g.name
                )));
            }
            if self.generators[..i].iter().any(|h| h.name == g.name) {
                return Err(FieldError::InvalidContext(format!(
                    "duplicate generator '{}'",
                    g.name
                )));
            }
            match &g.kind {
                GeneratorKind::Rational(_) => slots.push(Slot::Constant(i)),
                GeneratorKind::Generic {
                    witness,
                    contraction,
                } => {
                    if *contraction && (!witness.is_positive() || witness >= &Rational::one()) {
                        return Err(FieldError::InvalidContext(format!(
                            "generic generator '{}' has witness {} outside (0,1)",
                            g.name, witness
                        )));
                    }
                    slots.push(Slot::Generic(witnesses.len()));
                    witnesses.push(witness.clone());
                }
                GeneratorKind::Algebraic { minpoly, interval } => {
                    validate_algebraic(&g.name, minpoly, interval, &mut warnings)?;
                    slots.push(Slot::Algebraic(alg.len()));
                    alg.push((
                        g.name.clone(),
                        minpoly.clone(),
                        Interval::new(interval.0.clone(), interval.1.clone()),
                    ));
                }
            }
        }
        let has_alg = !alg.is_empty();
        if has_alg && !witnesses.is_empty() {
            warnings.push(
                "mixed algebraic and generic generators: independence between them is assumed, not verified".into(),
            );
        }
        let tower = AlgTower::new(alg, self.precision_cap_bits.unwrap_or(DEFAULT_PRECISION_CAP_BITS))?;
        Ok(Arc::new(ParameterContext {
            generators: self.generators,
            slots,
            witnesses,
            tower,
            assumptions: self.assumptions,
            warnings,
        }))
    }
}

fn validate_algebraic(
    name: &str,
    minpoly: &UPoly,
    (lo, hi): &(Rational, Rational),
    warnings: &mut Vec<String>,
) -> Result<(), FieldError> {
    let err = |m: String| Err(FieldError::InvalidContext(format!("{name}: {m}")));
    let Some(deg) = minpoly.degree() else {
        return err("minimal polynomial is zero".into());
    };
    if deg == 0 {
        return err("minimal polynomial is constant".into());
    }
    if lo >= hi {
        return err("isolating interval is empty".into());
    }
    if !minpoly.is_square_free() {
        return err("minimal polynomial is not square-free".into());
    }
    let at_lo = minpoly.eval(lo);
    let at_hi = minpoly.eval(hi);
    if at_lo.is_zero() || at_hi.is_zero() {
        return err("isolating interval endpoint is a root".into());
    }
    if at_lo.signum() == at_hi.signum() {
        return err("no sign change on the isolating interval".into());
    }
    if minpoly.count_roots(lo, hi) != 1 {
        return err("isolating interval does not contain exactly one root".into());
    }
    if deg > 1 && !minpoly.rational_roots().is_empty() {
        return err("minimal polynomial has a rational root, so it is reducible".into());
    }
    if deg > 3 {
        warnings.push(format!(
            "{name}: irreducibility of a degree-{deg} minimal polynomial is not certified"
        ));
    }
    Ok(())
}

impl ParameterContext {
    pub fn builder() -> ContextBuilder {
        ContextBuilder::default()
    }

    /// A context with no generators: plain ℚ.
    pub fn rationals() -> Arc<ParameterContext> {
        ContextBuilder::default().build().expect("empty context is valid")
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn assumptions(&self) -> &[Assumption] {
        &self.assumptions
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn is_rational_only(&self) -> bool {
        self.witnesses.is_empty() && self.tower.size() == 1
    }

    fn nvars(&self) -> usize {
        self.witnesses.len()
    }
}

/// Context-aware constructors; every `ParamValue` carries its context.
pub trait ContextExt {
    fn rational(&self, q: Rational) -> ParamValue;
    fn int(&self, n: i64) -> ParamValue;
    fn frac(&self, n: i64, d: i64) -> ParamValue;
    fn zero(&self) -> ParamValue;
    fn one(&self) -> ParamValue;
    fn generator(&self, name: &str) -> Option<ParamValue>;
}

impl ContextExt for Arc<ParameterContext> {
    fn rational(&self, q: Rational) -> ParamValue {
        let c = self.tower.constant(q);
        ParamValue {
            ctx: self.clone(),
            num: Poly::constant(self.nvars(), c),
            den: self.one_poly(),
        }
    }

    fn int(&self, n: i64) -> ParamValue {
        self.rational(Rational::from_integer(n.into()))
    }

    fn frac(&self, n: i64, d: i64) -> ParamValue {
        self.rational(Rational::new(n.into(), d.into()))
    }

    fn zero(&self) -> ParamValue {
        self.int(0)
    }

    fn one(&self) -> ParamValue {
        self.int(1)
    }

    fn generator(&self, name: &str) -> Option<ParamValue> {
        let i = self.generators.iter().position(|g| g.name == name)?;
        Some(match self.slots[i] {
            Slot::Constant(_) => match &self.generators[i].kind {
                GeneratorKind::Rational(q) => self.rational(q.clone()),
                _ => unreachable!(),
            },
            Slot::Generic(v) => ParamValue {
                ctx: self.clone(),
                num: Poly::var(&self.tower, self.nvars(), v),
                den: self.one_poly(),
            },
            Slot::Algebraic(a) => ParamValue {
                ctx: self.clone(),
                num: Poly::constant(self.nvars(), self.tower.generator(a)),
                den: self.one_poly(),
            },
        })
    }
}

impl ParameterContext {
    fn one_poly(&self) -> Poly {
        Poly::constant(self.nvars(), self.tower.constant(Rational::one()))
    }
}

/// An exact element of the parameter field, kept as a reduced fraction with
/// monic denominator.
#[derive(Clone)]
pub struct ParamValue {
    ctx: Arc<ParameterContext>,
    num: Poly,
    den: Poly,
}

impl PartialEq for ParamValue {
    fn eq(&self, other: &Self) -> bool {
        debug_assert!(Arc::ptr_eq(&self.ctx, &other.ctx));
        self.num == other.num && self.den == other.den
    }
}

impl Eq for ParamValue {}

impl Hash for ParamValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.num.hash(state);
        self.den.hash(state);
    }
}

impl fmt::Debug for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl ParamValue {
    pub fn context(&self) -> &Arc<ParameterContext> {
        &self.ctx
    }

    fn tower(&self) -> &AlgTower {
        &self.ctx.tower
    }

    fn from_parts(ctx: &Arc<ParameterContext>, num: Poly, den: Poly) -> ParamValue {
        let k = &ctx.tower;
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return ParamValue {
                ctx: ctx.clone(),
                num,
                den: ctx.one_poly(),
            };
        }
        let (num, den) = if den.is_constant() || ctx.nvars() == 0 {
            (num, den)
        } else {
            let g = gcd(k, &num, &den);
            if g.as_constant().is_some() {
                (num, den)
            } else {
                (
                    num.exact_div(k, &g).expect("gcd divides numerator"),
                    den.exact_div(k, &g).expect("gcd divides denominator"),
                )
            }
        };
        let (den, lc) = den.monic(k);
        let inv = k.inv(&lc).expect("nonzero leading coefficient");
        ParamValue {
            ctx: ctx.clone(),
            num: num.scale(k, &inv),
            den,
        }
    }

    /// Exact zero test; no numerics involved.
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.as_constant().is_some() && self.num.as_constant().is_some_and(AlgElem::is_one)
    }

    /// The value as a rational number, when it has no generator dependence.
    pub fn as_rational(&self) -> Option<Rational> {
        let n = if self.num.is_zero() {
            return Some(Rational::zero());
        } else {
            self.num.as_constant()?
        };
        let d = self.den.as_constant()?;
        Some(n.as_rational()? / d.as_rational()?)
    }

    pub fn checked_div(&self, other: &ParamValue) -> Result<ParamValue, FieldError> {
        if other.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let k = self.tower();
        Ok(ParamValue::from_parts(
            &self.ctx,
            self.num.mul(k, &other.den),
            self.den.mul(k, &other.num),
        ))
    }

    pub fn recip(&self) -> Result<ParamValue, FieldError> {
        self.ctx.one().checked_div(self)
    }

    pub fn pow(&self, e: u32) -> ParamValue {
        let mut acc = self.ctx.one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    fn poly_sign(&self, p: &Poly) -> Result<i32, FieldError> {
        let k = self.tower();
        let value = if self.ctx.nvars() == 0 {
            p.as_constant().cloned().unwrap_or_else(|| k.zero())
        } else {
            p.eval(k, &self.ctx.witnesses)
        };
        if value.is_zero() {
            if p.is_zero() {
                return Ok(0);
            }
            return Err(FieldError::IndeterminateSign {
                expr: self.to_string(),
            });
        }
        k.sign(&value).ok_or_else(|| FieldError::IndeterminateSign {
            expr: self.to_string(),
        })
    }

    /// −1, 0 or +1. Zero exactly when the normal form is zero.
    pub fn sign(&self) -> Result<i32, FieldError> {
        if self.num.is_zero() {
            return Ok(0);
        }
        Ok(self.poly_sign(&self.num)? * self.poly_sign(&self.den)?)
    }

    pub fn abs(&self) -> Result<ParamValue, FieldError> {
        Ok(if self.sign()? < 0 { -self } else { self.clone() })
    }

    /// Exact total order: the sign of `self - other`.
    pub fn try_cmp(&self, other: &ParamValue) -> Result<Ordering, FieldError> {
        if self == other {
            return Ok(Ordering::Equal);
        }
        Ok(match (self - other).sign()? {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        })
    }

    pub fn lt(&self, other: &ParamValue) -> Result<bool, FieldError> {
        Ok(self.try_cmp(other)? == Ordering::Less)
    }

    pub fn le(&self, other: &ParamValue) -> Result<bool, FieldError> {
        Ok(self.try_cmp(other)? != Ordering::Greater)
    }

    pub fn max(&self, other: &ParamValue) -> Result<ParamValue, FieldError> {
        Ok(if self.lt(other)? { other.clone() } else { self.clone() })
    }

    pub fn min(&self, other: &ParamValue) -> Result<ParamValue, FieldError> {
        Ok(if other.lt(self)? { other.clone() } else { self.clone() })
    }

    fn poly_enclosure(&self, p: &Poly, level: usize) -> Interval {
        let k = self.tower();
        let value = if self.ctx.nvars() == 0 {
            p.as_constant().cloned().unwrap_or_else(|| k.zero())
        } else {
            p.eval(k, &self.ctx.witnesses)
        };
        k.enclose(&value, level)
    }

    /// Rational enclosure of the value at the witness point. Exact (a point)
    /// for contexts without algebraic generators.
    pub fn enclosure(&self) -> Interval {
        let n = self.poly_enclosure(&self.num, 0);
        let d = self.poly_enclosure(&self.den, 0);
        if d.lo.is_positive() || d.hi.is_negative() {
            let inv = if d.lo == d.hi {
                Interval::point(d.lo.recip())
            } else {
                let (a, b) = (d.lo.recip(), d.hi.recip());
                if a < b { Interval::new(a, b) } else { Interval::new(b, a) }
            };
            n.mul(&inv)
        } else {
            // denominator enclosure straddles zero only if the precision floor
            // is too coarse; fall back to midpoints
            let m = n.midpoint() / d.midpoint();
            Interval::point(m)
        }
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.enclosure().midpoint())
    }

    /// Natural-log enclosure for positive values.
    pub fn ln_enclosure(&self) -> (f64, f64) {
        let e = self.enclosure();
        let lo = rational_ln(&e.lo);
        let hi = rational_ln(&e.hi);
        (lo.min(hi), lo.max(hi))
    }
}

impl<'a> Add<&'a ParamValue> for &'a ParamValue {
    type Output = ParamValue;
    fn add(self, o: &ParamValue) -> ParamValue {
        let k = self.tower();
        if self.den == o.den {
            return ParamValue::from_parts(&self.ctx, self.num.add(k, &o.num), self.den.clone());
        }
        ParamValue::from_parts(
            &self.ctx,
            self.num.mul(k, &o.den).add(k, &o.num.mul(k, &self.den)),
            self.den.mul(k, &o.den),
        )
    }
}

impl<'a> Sub<&'a ParamValue> for &'a ParamValue {
    type Output = ParamValue;
    fn sub(self, o: &ParamValue) -> ParamValue {
        self + &(-o)
    }
}

impl<'a> Mul<&'a ParamValue> for &'a ParamValue {
    type Output = ParamValue;
    fn mul(self, o: &ParamValue) -> ParamValue {
        let k = self.tower();
        if self.den.as_constant().is_some() && o.den.as_constant().is_some() {
            return ParamValue {
                ctx: self.ctx.clone(),
                num: self.num.mul(k, &o.num),
                den: self.den.clone(),
            };
        }
        ParamValue::from_parts(&self.ctx, self.num.mul(k, &o.num), self.den.mul(k, &o.den))
    }
}

impl Neg for &ParamValue {
    type Output = ParamValue;
    fn neg(self) -> ParamValue {
        ParamValue {
            ctx: self.ctx.clone(),
            num: self.num.neg(self.tower()),
            den: self.den.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<ParamValue> for ParamValue {
            type Output = ParamValue;
            fn $m(self, o: ParamValue) -> ParamValue {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a ParamValue> for ParamValue {
            type Output = ParamValue;
            fn $m(self, o: &ParamValue) -> ParamValue {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<ParamValue> for &'a ParamValue {
            type Output = ParamValue;
            fn $m(self, o: ParamValue) -> ParamValue {
                self.$m(&o)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for ParamValue {
    type Output = ParamValue;
    fn neg(self) -> ParamValue {
        -&self
    }
}

// --- rendering ---------------------------------------------------------

/// One rendered monomial: rational coefficient and exponents over all
/// generators in declaration order.
fn flatten(ctx: &ParameterContext, p: &Poly) -> Vec<(Vec<u32>, Rational)> {
    let k = &ctx.tower;
    let mut out: Vec<(Vec<u32>, Rational)> = Vec::new();
    for (m, c) in &p.terms {
        for (idx, q) in c.coeffs.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            let alg_e = k.exponents(idx);
            let exps: Vec<u32> = ctx
                .slots
                .iter()
                .map(|s| match s {
                    Slot::Constant(_) => 0,
                    Slot::Generic(v) => m.0[*v],
                    Slot::Algebraic(a) => alg_e[*a] as u32,
                })
                .collect();
            out.push((exps, q.clone()));
        }
    }
    out.sort_by(|a, b| Mono(b.0.clone()).cmp(&Mono(a.0.clone())));
    out
}

fn render_poly(ctx: &ParameterContext, p: &Poly) -> (String, usize) {
    let terms = flatten(ctx, p);
    if terms.is_empty() {
        return ("0".into(), 1);
    }
    let mut s = String::new();
    for (i, (exps, c)) in terms.iter().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        if i == 0 {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        let vars: Vec<String> = exps
            .iter()
            .enumerate()
            .filter(|(_, e)| **e > 0)
            .map(|(g, e)| {
                let name = &ctx.generators[g].name;
                if *e == 1 {
                    name.clone()
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect();
        if vars.is_empty() {
            s.push_str(&mag.to_string());
        } else {
            if !mag.is_one() {
                s.push_str(&mag.to_string());
                s.push('*');
            }
            s.push_str(&vars.join("*"));
        }
    }
    (s, terms.len())
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, nterms) = render_poly(&self.ctx, &self.num);
        let den_one = self
            .den
            .as_constant()
            .is_some_and(AlgElem::is_one);
        if den_one {
            return f.write_str(&n);
        }
        let (d, dterms) = render_poly(&self.ctx, &self.den);
        let n = if nterms > 1 { format!("({n})") } else { n };
        let d = if dterms > 1 || d.contains('*') { format!("({d})") } else { d };
        write!(f, "{n}/{d}")
    }
}

// --- numeric helpers ----------------------------------------------------

fn bigint_ln(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational, without underflow for tiny values.
pub fn rational_ln(q: &Rational) -> f64 {
    if !q.is_positive() {
        return f64::NEG_INFINITY;
    }
    bigint_ln(q.numer()) - bigint_ln(q.denom())
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n.abs() < 1e300 && d < 1e300 {
            return n / d;
        }
    }
    let sign = if q.numer().sign() == Sign::Minus { -1.0 } else { 1.0 };
    sign * rational_ln(&q.abs()).exp()
}

/// Decimal rendering with 12 significant digits.
pub fn fmt_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.11e}")
    }
}
