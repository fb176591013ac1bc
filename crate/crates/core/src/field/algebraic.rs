//! The algebraic part of a parameter field: ℚ(α₁,…,α_j) for independently
//! declared algebraic generators, stored densely over the monomial basis
//! `α^e` with `e_i < deg(m_i)`.

use std::sync::OnceLock;

use num_traits::{One, Signed, Zero};

use super::interval::Interval;
use super::upoly::UPoly;
use super::{FieldError, Rational};

#[derive(Debug)]
pub(crate) struct AlgGen {
    /// Monic minimal polynomial.
    pub minpoly: UPoly,
    pub interval: Interval,
    /// `reduce[k]` is `α^k` expressed in the basis `1, α, …, α^{d-1}`, for `k < 2d - 1`.
    reduce: Vec<Vec<Rational>>,
    /// Isolating intervals refined to width `2^-(64 << level)`.
    refined: Vec<OnceLock<Interval>>,
}

impl AlgGen {
    pub fn degree(&self) -> usize {
        self.minpoly.degree().unwrap_or(0)
    }
}

/// Element of the algebraic tower; `coeffs[idx]` multiplies the basis
/// monomial with mixed-radix index `idx`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlgElem {
    pub(crate) coeffs: Vec<Rational>,
}

#[derive(Debug)]
pub(crate) struct AlgTower {
    pub gens: Vec<AlgGen>,
    dims: Vec<usize>,
    size: usize,
    precision_levels: usize,
}

impl AlgTower {
    pub fn new(
        gens: Vec<(String, UPoly, Interval)>,
        precision_cap_bits: u32,
    ) -> Result<Self, FieldError> {
        let mut levels = 1;
        let mut bits = 64u32;
        while bits < precision_cap_bits {
            bits = bits.saturating_mul(2);
            levels += 1;
        }
        let mut out = Vec::new();
        for (name, minpoly, interval) in gens {
            let minpoly = minpoly.monic();
            let d = minpoly
                .degree()
                .filter(|d| *d >= 1)
                .ok_or_else(|| FieldError::InvalidContext(format!("{name}: minimal polynomial must have degree ≥ 1")))?;
            // x^k mod m for k in 0..2d-1
            let mut reduce = Vec::with_capacity(2 * d);
            for k in 0..(2 * d - 1).max(1) {
                let mut mono = vec![Rational::zero(); k + 1];
                mono[k] = Rational::one();
                let r = UPoly::new(mono).rem(&minpoly);
                let mut v = r.coeffs().to_vec();
                v.resize(d, Rational::zero());
                reduce.push(v);
            }
            out.push(AlgGen {
                minpoly,
                interval,
                reduce,
                refined: (0..levels).map(|_| OnceLock::new()).collect(),
            });
        }
        let dims: Vec<usize> = out.iter().map(AlgGen::degree).collect();
        let size = dims.iter().product::<usize>().max(1);
        Ok(AlgTower {
            gens: out,
            dims,
            size,
            precision_levels: levels,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn zero(&self) -> AlgElem {
        AlgElem {
            coeffs: vec![Rational::zero(); self.size],
        }
    }

    pub fn constant(&self, c: Rational) -> AlgElem {
        let mut e = self.zero();
        e.coeffs[0] = c;
        e
    }

    pub fn generator(&self, i: usize) -> AlgElem {
        let mut e = self.zero();
        if self.dims[i] == 1 {
            // degree-one minimal polynomial: the generator is rational
            e.coeffs[0] = -self.gens[i].minpoly.coeffs()[0].clone();
        } else {
            e.coeffs[self.stride(i)] = Rational::one();
        }
        e
    }

    fn stride(&self, i: usize) -> usize {
        self.dims[..i].iter().product()
    }

    pub fn exponents(&self, mut idx: usize) -> Vec<usize> {
        self.dims
            .iter()
            .map(|d| {
                let e = idx % d;
                idx /= d;
                e
            })
            .collect()
    }

    pub fn add(&self, a: &AlgElem, b: &AlgElem) -> AlgElem {
        AlgElem {
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn neg(&self, a: &AlgElem) -> AlgElem {
        AlgElem {
            coeffs: a.coeffs.iter().map(|x| -x).collect(),
        }
    }

    pub fn scale(&self, a: &AlgElem, c: &Rational) -> AlgElem {
        AlgElem {
            coeffs: a.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn mul(&self, a: &AlgElem, b: &AlgElem) -> AlgElem {
        if self.size == 1 {
            return AlgElem {
                coeffs: vec![&a.coeffs[0] * &b.coeffs[0]],
            };
        }
        // unreduced product with per-variable exponents up to 2d-2
        let wide: Vec<usize> = self.dims.iter().map(|d| 2 * d - 1).collect();
        let wide_size: usize = wide.iter().product();
        let mut acc = vec![Rational::zero(); wide_size];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let ei = self.exponents(i);
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let ej = self.exponents(j);
                let mut idx = 0;
                let mut stride = 1;
                for v in 0..self.dims.len() {
                    idx += (ei[v] + ej[v]) * stride;
                    stride *= wide[v];
                }
                acc[idx] += x * y;
            }
        }
        // reduce one variable at a time
        let mut cur_dims = wide.clone();
        for v in 0..self.dims.len() {
            let d = self.dims[v];
            let mut next_dims = cur_dims.clone();
            next_dims[v] = d;
            let next_size: usize = next_dims.iter().product();
            let mut next = vec![Rational::zero(); next_size];
            for (idx, c) in acc.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let mut e = decompose(idx, &cur_dims);
                let k = e[v];
                for (t, r) in self.gens[v].reduce[k].iter().enumerate() {
                    if r.is_zero() {
                        continue;
                    }
                    e[v] = t;
                    next[compose(&e, &next_dims)] += c * r;
                }
            }
            acc = next;
            cur_dims = next_dims;
        }
        AlgElem { coeffs: acc }
    }

    /// Multiplicative inverse by solving the linear system for the
    /// multiplication-by-`a` map.
    pub fn inv(&self, a: &AlgElem) -> Result<AlgElem, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        if self.size == 1 {
            return Ok(AlgElem {
                coeffs: vec![a.coeffs[0].recip()],
            });
        }
        let n = self.size;
        // column k = a * basis_k
        let mut m = vec![vec![Rational::zero(); n + 1]; n];
        for k in 0..n {
            let mut basis = self.zero();
            basis.coeffs[k] = Rational::one();
            let col = self.mul(a, &basis);
            for (row, c) in col.coeffs.into_iter().enumerate() {
                m[row][k] = c;
            }
        }
        m[0][n] = Rational::one();
        for col in 0..n {
            let pivot = (col..n)
                .find(|r| !m[*r][col].is_zero())
                .ok_or_else(|| FieldError::InvalidContext(
                    "algebraic generators are not independent: zero divisor encountered".into(),
                ))?;
            m.swap(col, pivot);
            let p = m[col][col].clone();
            for x in m[col].iter_mut() {
                *x /= &p;
            }
            let pivot_row = m[col].clone();
            for (r, row) in m.iter_mut().enumerate() {
                if r != col && !row[col].is_zero() {
                    let f = row[col].clone();
                    for (x, y) in row.iter_mut().zip(&pivot_row) {
                        *x -= &f * y;
                    }
                }
            }
        }
        Ok(AlgElem {
            coeffs: m.into_iter().map(|mut row| row.pop().unwrap()).collect(),
        })
    }

    fn refined(&self, gen: usize, level: usize) -> &Interval {
        self.gens[gen].refined[level].get_or_init(|| {
            let g = &self.gens[gen];
            let start = if level == 0 {
                g.interval.clone()
            } else {
                self.refined(gen, level - 1).clone()
            };
            let bits = 64u32 << level;
            let target = Rational::new(1.into(), num_bigint::BigInt::one() << bits);
            let mut iv = start;
            let lo_sign = g.minpoly.eval(&iv.lo).signum();
            while iv.width() > target {
                let mid = iv.midpoint();
                let s = g.minpoly.eval(&mid);
                if s.is_zero() {
                    iv = Interval::point(mid);
                    break;
                }
                if s.signum() == lo_sign {
                    iv.lo = mid;
                } else {
                    iv.hi = mid;
                }
            }
            iv
        })
    }

    /// Enclosure of `a` with generators refined to the given level.
    pub fn enclose(&self, a: &AlgElem, level: usize) -> Interval {
        if self.size == 1 {
            return Interval::point(a.coeffs[0].clone());
        }
        let gens: Vec<&Interval> = (0..self.gens.len()).map(|g| self.refined(g, level)).collect();
        let mut acc = Interval::point(Rational::zero());
        for (idx, c) in a.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = self.exponents(idx);
            let mut term = Interval::point(c.clone());
            for (g, k) in e.iter().enumerate() {
                if *k > 0 {
                    term = term.mul(&gens[g].pow(*k as u32));
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// Sign by exact test for zero followed by escalating interval
    /// refinement. `None` means the enclosure still straddles zero at the cap.
    pub fn sign(&self, a: &AlgElem) -> Option<i32> {
        if a.is_zero() {
            return Some(0);
        }
        if self.size == 1 {
            return Some(if a.coeffs[0].is_positive() { 1 } else { -1 });
        }
        for level in 0..self.precision_levels {
            let iv = self.enclose(a, level);
            if iv.lo.is_positive() {
                return Some(1);
            }
            if iv.hi.is_negative() {
                return Some(-1);
            }
        }
        None
    }
}

fn decompose(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    dims.iter()
        .map(|d| {
            let e = idx % d;
            idx /= d;
            e
        })
        .collect()
}

fn compose(e: &[usize], dims: &[usize]) -> usize {
    let mut idx = 0;
    let mut stride = 1;
    for (x, d) in e.iter().zip(dims) {
        idx += x * stride;
        stride *= d;
    }
    idx
}

impl AlgElem {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// The rational value when the element has no algebraic part.
    pub fn as_rational(&self) -> Option<&Rational> {
        self.coeffs[1..]
            .iter()
            .all(Zero::is_zero)
            .then(|| &self.coeffs[0])
    }
}
