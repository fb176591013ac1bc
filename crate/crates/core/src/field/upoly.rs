//! Dense univariate polynomials over ℚ, used for minimal polynomials of
//! algebraic generators.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Rational;

/// Coefficients stored lowest degree first; no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UPoly {
    coeffs: Vec<Rational>,
}

impl UPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn zero() -> Self {
        UPoly { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let lc = self.leading();
        UPoly::new(self.coeffs.iter().map(|c| c / &lc).collect())
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        UPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        UPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    /// Polynomial remainder `self mod d`.
    pub fn rem(&self, d: &UPoly) -> UPoly {
        assert!(!d.is_zero(), "remainder by zero polynomial");
        let dd = d.coeffs.len() - 1;
        let lc = d.leading();
        let mut r = self.coeffs.clone();
        while r.len() > dd && !r.is_empty() {
            let shift = r.len() - 1 - dd;
            let factor = r.last().unwrap() / &lc;
            for (i, c) in d.coeffs.iter().enumerate() {
                r[shift + i] -= &factor * c;
            }
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        UPoly::new(r)
    }

    pub fn gcd(&self, other: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn is_square_free(&self) -> bool {
        self.gcd(&self.derivative()).degree() == Some(0)
    }

    fn sturm_sequence(&self) -> Vec<UPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let r = seq[n - 2].rem(&seq[n - 1]).neg();
            if r.is_zero() {
                break;
            }
            seq.push(r);
        }
        seq
    }

    fn sign_changes(seq: &[UPoly], x: &Rational) -> usize {
        let signs: Vec<i32> = seq
            .iter()
            .map(|p| {
                let v = p.eval(x);
                if v.is_positive() {
                    1
                } else if v.is_negative() {
                    -1
                } else {
                    0
                }
            })
            .filter(|s| *s != 0)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Number of distinct real roots in the half-open interval `(lo, hi]`.
    pub fn count_roots(&self, lo: &Rational, hi: &Rational) -> usize {
        let seq = self.sturm_sequence();
        Self::sign_changes(&seq, lo).saturating_sub(Self::sign_changes(&seq, hi))
    }

    /// Rational roots, by the rational root test on the integer-normalized
    /// polynomial. Only used for low degrees, where the divisor search is cheap.
    pub fn rational_roots(&self) -> Vec<Rational> {
        let Some(deg) = self.degree() else {
            return Vec::new();
        };
        if deg == 0 {
            return Vec::new();
        }
        let mut roots = Vec::new();
        let mut p = self.clone();
        // strip zero roots
        while p.coeffs.first().is_some_and(Zero::is_zero) {
            if !roots.iter().any(Zero::is_zero) {
                roots.push(Rational::zero());
            }
            p = UPoly::new(p.coeffs[1..].to_vec());
        }
        if p.degree() == Some(0) {
            return roots;
        }
        let lcm = p
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = p
            .coeffs
            .iter()
            .map(|c| (c * Rational::from_integer(lcm.clone())).to_integer())
            .collect();
        let a0 = ints[0].abs();
        let an = ints.last().unwrap().abs();
        let (Some(num_divs), Some(den_divs)) = (small_divisors(&a0), small_divisors(&an)) else {
            return roots;
        };
        for n in &num_divs {
            for d in &den_divs {
                for s in [1, -1] {
                    let cand = Rational::new(BigInt::from(s) * n, d.clone());
                    if p.eval(&cand).is_zero() && !roots.contains(&cand) {
                        roots.push(cand);
                    }
                }
            }
        }
        roots
    }
}

fn small_divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let limit = BigInt::from(1_000_000u64);
    if n > &limit {
        return None;
    }
    let n: u64 = n.try_into().ok()?;
    Some(
        (1..=n)
            .filter(|d| n % d == 0)
            .map(BigInt::from)
            .collect(),
    )
}
