//! Sparse multivariate polynomials in the generic generators with
//! coefficients in the algebraic tower, plus the recursive primitive-PRS gcd
//! used to keep fractions reduced.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::algebraic::{AlgElem, AlgTower};
use super::Rational;

/// Exponent vector, ordered graded-lexicographically by declaration order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn one(nvars: usize) -> Self {
        Mono(vec![0; nvars])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, o: &Mono) -> Mono {
        Mono(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    fn div(&self, o: &Mono) -> Option<Mono> {
        self.0
            .iter()
            .zip(&o.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Mono)
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    pub(crate) nvars: usize,
    pub(crate) terms: BTreeMap<Mono, AlgElem>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: AlgElem) -> Self {
        let mut p = Poly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Mono::one(nvars), c);
        }
        p
    }

    pub fn var(k: &AlgTower, nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Poly::zero(nvars);
        p.terms.insert(Mono(e), k.constant(Rational::from_integer(1.into())));
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<&AlgElem> {
        match self.terms.len() {
            0 => None,
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                (m.degree() == 0).then_some(c)
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.is_zero() || self.as_constant().is_some()
    }

    pub fn leading(&self) -> Option<(&Mono, &AlgElem)> {
        self.terms.iter().next_back()
    }

    fn insert_add(&mut self, k: &AlgTower, m: Mono, c: AlgElem) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                let s = k.add(o.get(), &c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, k: &AlgTower, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert_add(k, m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self, k: &AlgTower) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), k.neg(c))).collect(),
        }
    }

    pub fn sub(&self, k: &AlgTower, o: &Poly) -> Poly {
        self.add(k, &o.neg(k))
    }

    pub fn mul(&self, k: &AlgTower, o: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.insert_add(k, m1.mul(m2), k.mul(c1, c2));
            }
        }
        out
    }

    pub fn scale(&self, k: &AlgTower, c: &AlgElem) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, x)| (m.clone(), k.mul(x, c)))
                .collect(),
        }
    }

    fn mul_term(&self, k: &AlgTower, m: &Mono, c: &AlgElem) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m2, x)| (m2.mul(m), k.mul(x, c)))
                .filter(|(_, x)| !x.is_zero())
                .collect(),
        }
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn exact_div(&self, k: &AlgTower, d: &Poly) -> Option<Poly> {
        let (dm, dc) = d.leading()?;
        let dc_inv = k.inv(dc).ok()?;
        let mut rem = self.clone();
        let mut quot = Poly::zero(self.nvars);
        while let Some((rm, rc)) = rem.leading() {
            let m = rm.div(dm)?;
            let c = k.mul(rc, &dc_inv);
            rem = rem.sub(k, &d.mul_term(k, &m, &c));
            quot.insert_add(k, m, c);
        }
        Some(quot)
    }

    pub fn involves(&self, v: usize) -> bool {
        self.terms.keys().any(|m| m.0[v] > 0)
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m.0[v]).max().unwrap_or(0)
    }

    /// Coefficients with respect to `v`, lowest power first.
    fn coeffs_in(&self, v: usize) -> Vec<Poly> {
        let deg = self.degree_in(v) as usize;
        let mut out = vec![Poly::zero(self.nvars); deg + 1];
        for (m, c) in &self.terms {
            let mut m2 = m.clone();
            let e = m2.0[v] as usize;
            m2.0[v] = 0;
            out[e].terms.insert(m2, c.clone());
        }
        out
    }

    fn shift_in(&self, v: usize, by: u32) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut m2 = m.clone();
                    m2.0[v] += by;
                    (m2, c.clone())
                })
                .collect(),
        }
    }

    /// Scales so the leading coefficient is one; returns the scaled
    /// polynomial together with the original leading coefficient.
    pub fn monic(&self, k: &AlgTower) -> (Poly, AlgElem) {
        match self.leading() {
            None => (self.clone(), k.constant(Rational::from_integer(1.into()))),
            Some((_, lc)) => {
                let lc = lc.clone();
                let inv = k.inv(&lc).expect("nonzero leading coefficient");
                (self.scale(k, &inv), lc)
            }
        }
    }

    fn first_var(&self, other: &Poly) -> Option<usize> {
        (0..self.nvars).find(|v| self.involves(*v) || other.involves(*v))
    }

    fn content_in(&self, k: &AlgTower, v: usize) -> Poly {
        let mut g = Poly::zero(self.nvars);
        for c in self.coeffs_in(v) {
            if c.is_zero() {
                continue;
            }
            g = if g.is_zero() { c.monic(k).0 } else { gcd(k, &g, &c) };
            if g.as_constant().is_some() {
                break;
            }
        }
        g
    }

    fn primitive_in(&self, k: &AlgTower, v: usize) -> Poly {
        let c = self.content_in(k, v);
        self.exact_div(k, &c).expect("content divides")
    }

    fn prem(&self, k: &AlgTower, b: &Poly, v: usize) -> Poly {
        let db = b.degree_in(v);
        let lcb = b.coeffs_in(v).pop().unwrap();
        let mut r = self.clone();
        while !r.is_zero() && r.involves(v) && r.degree_in(v) >= db {
            let dr = r.degree_in(v);
            let lcr = r.coeffs_in(v).pop().unwrap();
            r = r
                .mul(k, &lcb)
                .sub(k, &b.mul(k, &lcr).shift_in(v, dr - db));
        }
        r
    }

    pub fn eval(&self, k: &AlgTower, point: &[Rational]) -> AlgElem {
        let mut acc = k.zero();
        for (m, c) in &self.terms {
            let mut f = Rational::from_integer(1.into());
            for (x, e) in point.iter().zip(&m.0) {
                for _ in 0..*e {
                    f *= x;
                }
            }
            acc = k.add(&acc, &k.scale(c, &f));
        }
        acc
    }
}

/// Monic gcd (the zero polynomial only when both inputs are zero).
pub fn gcd(k: &AlgTower, a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic(k).0;
    }
    if b.is_zero() {
        return a.monic(k).0;
    }
    let one = Poly::constant(a.nvars, k.constant(Rational::from_integer(1.into())));
    let Some(v) = a.first_var(b) else {
        return one;
    };
    if !a.involves(v) {
        return gcd(k, a, &b.content_in(k, v));
    }
    if !b.involves(v) {
        return gcd(k, &a.content_in(k, v), b);
    }
    let ca = a.content_in(k, v);
    let cb = b.content_in(k, v);
    let c = gcd(k, &ca, &cb);
    let mut x = a.exact_div(k, &ca).expect("content divides");
    let mut y = b.exact_div(k, &cb).expect("content divides");
    if x.degree_in(v) < y.degree_in(v) {
        std::mem::swap(&mut x, &mut y);
    }
    loop {
        if y.is_zero() {
            break;
        }
        if !y.involves(v) {
            x = one.clone();
            break;
        }
        let r = x.prem(k, &y, v);
        x = y;
        y = if r.is_zero() { r } else { r.primitive_in(k, v) };
    }
    let g = if x.involves(v) { x.primitive_in(k, v) } else { one };
    g.mul(k, &c).monic(k).0
}
