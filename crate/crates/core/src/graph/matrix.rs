//! Transition matrices with entries that are polynomials in the
//! probabilities `p_1, …, p_m` with non-negative integer coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::field::{rational_to_f64, Rational};

/// `Σ c · p^e` over exponent vectors `e`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Weight {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, u64>,
}

impl Weight {
    pub fn zero(nvars: usize) -> Self {
        Weight {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        let mut w = Weight::zero(nvars);
        w.terms.insert(vec![0; nvars], 1);
        w
    }

    /// The single probability `p_i` (0-based).
    pub fn prob(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut w = Weight::zero(nvars);
        w.terms.insert(e, 1);
        w
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], u64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn add(&self, o: &Weight) -> Weight {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            *out.terms.entry(e.clone()).or_insert(0) += c;
        }
        out
    }

    pub fn mul(&self, o: &Weight) -> Weight {
        let mut out = Weight::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *out.terms.entry(e).or_insert(0) += c1 * c2;
            }
        }
        out
    }

    pub fn eval(&self, probs: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = Rational::from_integer((*c).into());
            for (p, k) in probs.iter().zip(e) {
                for _ in 0..*k {
                    t *= p;
                }
            }
            acc += t;
        }
        acc
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(e, c)| {
                let vars: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, k)| **k > 0)
                    .map(|(i, k)| if *k == 1 { format!("p{}", i + 1) } else { format!("p{}^{k}", i + 1) })
                    .collect();
                match (vars.is_empty(), *c) {
                    (true, c) => c.to_string(),
                    (false, 1) => vars.join("*"),
                    (false, c) => format!("{c}*{}", vars.join("*")),
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Rows index parent neighbours, columns child neighbours, both in
/// canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TransitionMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Weight>,
}

impl TransitionMatrix {
    pub fn zeros(nvars: usize, rows: usize, cols: usize) -> Self {
        TransitionMatrix {
            rows,
            cols,
            entries: vec![Weight::zero(nvars); rows * cols],
        }
    }

    pub fn identity(nvars: usize, n: usize) -> Self {
        let mut m = TransitionMatrix::zeros(nvars, n, n);
        for i in 0..n {
            m.entries[i * n + i] = Weight::one(nvars);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Weight {
        &self.entries[i * self.cols + j]
    }

    pub fn add_to(&mut self, i: usize, j: usize, w: &Weight) {
        let e = &mut self.entries[i * self.cols + j];
        *e = e.add(w);
    }

    pub fn mul(&self, o: &TransitionMatrix) -> TransitionMatrix {
        assert_eq!(self.cols, o.rows, "matrix dimension mismatch");
        let nvars = self.entries.first().map_or(0, |w| w.nvars);
        let mut out = TransitionMatrix::zeros(nvars, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        out.add_to(i, j, &a.mul(b));
                    }
                }
            }
        }
        out
    }

    /// Every column has a non-zero entry.
    pub fn columns_positive(&self) -> bool {
        (0..self.cols).all(|j| (0..self.rows).any(|i| !self.get(i, j).is_zero()))
    }

    pub fn eval(&self, probs: &[Rational]) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.entries.iter().map(|w| w.eval(probs)).collect(),
        }
    }

    /// Row-major textual entries, e.g. `[[p3, 0], [p1*p3, p2]]`.
    pub fn symbolic(&self) -> String {
        let rows: Vec<String> = (0..self.rows)
            .map(|i| {
                let r: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
                format!("[{}]", r.join(", "))
            })
            .collect();
        format!("[{}]", rows.join(", "))
    }
}

/// Dense matrix of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Rational>,
}

impl RatMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![Rational::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = Rational::one();
        }
        RatMatrix { rows: n, cols: n, data }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        RatMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn mul(&self, o: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, o.rows, "matrix dimension mismatch");
        let mut data = vec![Rational::zero(); self.rows * o.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        data[i * o.cols + j] += a * b;
                    }
                }
            }
        }
        RatMatrix {
            rows: self.rows,
            cols: o.cols,
            data,
        }
    }

    pub fn pow(&self, n: u32) -> RatMatrix {
        let mut acc = RatMatrix::identity(self.rows);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Sum of all entries; for a row vector this is its 1-norm.
    pub fn entry_sum(&self) -> Rational {
        self.data.iter().sum()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| rational_to_f64(self.get(i, j))).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn symbolic_product() {
        // (p1, p2) row vector times [[p3, 0], [0, 1]]
        let mut a = TransitionMatrix::zeros(3, 1, 2);
        a.add_to(0, 0, &Weight::prob(3, 0));
        a.add_to(0, 1, &Weight::prob(3, 1));
        let mut b = TransitionMatrix::zeros(3, 2, 2);
        b.add_to(0, 0, &Weight::prob(3, 2));
        b.add_to(1, 1, &Weight::one(3));
        let c = a.mul(&b);
        assert_eq!(c.symbolic(), "[[p1*p3, p2]]");
        let v = c.eval(&[q(1, 5), q(1, 2), q(3, 10)]);
        assert_eq!(v.data, vec![q(3, 50), q(1, 2)]);
        assert!(c.columns_positive());
    }

    #[test]
    fn weight_arithmetic() {
        let w = Weight::prob(2, 0).add(&Weight::prob(2, 0)).mul(&Weight::prob(2, 1));
        assert_eq!(w.to_string(), "2*p1*p2");
        assert_eq!(w.eval(&[q(1, 3), q(2, 3)]), q(4, 9));
    }
}
