use num_traits::{Signed, Zero};

use crate::field::{rational_ln, rational_to_f64, ParamValue, Rational};
use crate::graph::{strongly_connected_components, RatMatrix, TransitionGraph};

use super::path::path_data;
use super::AnalysisError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
}

impl Enclosure {
    pub fn point(x: f64) -> Self {
        Enclosure { lo: x, hi: x }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// A local dimension `log spr / log L` with propagated bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimensionEstimate {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

fn check_square(m: &RatMatrix) -> Result<(), AnalysisError> {
    if m.rows != m.cols {
        return Err(AnalysisError::NonSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    Ok(())
}

/// Largest diagonal entry when the matrix is triangular (then it is the
/// spectral radius exactly).
fn triangular_spr(m: &RatMatrix) -> Option<Rational> {
    let n = m.rows;
    let upper = (0..n).all(|i| (0..i).all(|j| m.get(i, j).is_zero()));
    let lower = (0..n).all(|i| (i + 1..n).all(|j| m.get(i, j).is_zero()));
    if !(upper || lower) {
        return None;
    }
    (0..n).map(|i| m.get(i, i).abs()).max()
}

/// Collatz–Wielandt enclosure of the Perron root of an irreducible block,
/// using `B + sI` (primitive) and repeated squaring for the test vector.
fn irreducible_block(b: &[Vec<f64>], rel_tol: f64) -> Enclosure {
    let k = b.len();
    if k == 1 {
        return Enclosure::point(b[0][0]);
    }
    let max_row = b.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
    let s = 0.5 * max_row;
    let c: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| b[i][j] + if i == j { s } else { 0.0 }).collect())
        .collect();
    let mut p = c.clone();
    let mut best = Enclosure {
        lo: 0.0,
        hi: max_row,
    };
    for _ in 0..64 {
        let v: Vec<f64> = p
            .iter()
            .map(|r| r.iter().sum::<f64>().max(f64::MIN_POSITIVE))
            .collect();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..k {
            let cv: f64 = (0..k).map(|j| c[i][j] * v[j]).sum();
            let r = cv / v[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let slack = 8.0 * k as f64 * f64::EPSILON;
        let e = Enclosure {
            lo: ((lo - s) * (1.0 - slack) - s * slack).max(0.0),
            hi: (hi - s) * (1.0 + slack) + s * slack,
        };
        best = Enclosure {
            lo: best.lo.max(e.lo),
            hi: best.hi.min(e.hi),
        };
        if best.width() <= rel_tol * best.hi {
            break;
        }
        // square and renormalize
        let mut q = vec![vec![0.0; k]; k];
        for i in 0..k {
            for l in 0..k {
                let a = p[i][l];
                if a == 0.0 {
                    continue;
                }
                for j in 0..k {
                    q[i][j] += a * p[l][j];
                }
            }
        }
        let mx = q.iter().flatten().fold(0.0f64, |a, b| a.max(*b));
        p = q.into_iter().map(|r| r.into_iter().map(|x| x / mx).collect()).collect();
    }
    best
}

/// Enclosure of `spr(A)` for a non-negative float matrix, block by block
/// over the irreducible components of its pattern.
fn float_spr(a: &[Vec<f64>], rel_tol: f64) -> Enclosure {
    let n = a.len();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| a[i][j] > 0.0).collect())
        .collect();
    let mut out = Enclosure::point(0.0);
    for comp in strongly_connected_components(&adj) {
        let cyclic = comp.len() > 1 || a[comp[0]][comp[0]] > 0.0;
        if !cyclic {
            continue;
        }
        let block: Vec<Vec<f64>> = comp
            .iter()
            .map(|&i| comp.iter().map(|&j| a[i][j]).collect())
            .collect();
        let e = irreducible_block(&block, rel_tol);
        out = Enclosure {
            lo: out.lo.max(e.lo),
            hi: out.hi.max(e.hi),
        };
    }
    out
}

/// `ln spr(M)` enclosure, or `None` for a nilpotent pattern.
fn ln_spr(m: &RatMatrix, rel_tol: f64) -> Result<Option<Enclosure>, AnalysisError> {
    check_square(m)?;
    if let Some(d) = triangular_spr(m) {
        if d.is_zero() {
            return Ok(None);
        }
        let l = rational_ln(&d);
        let slack = 4.0 * f64::EPSILON * l.abs().max(1.0);
        return Ok(Some(Enclosure {
            lo: l - slack,
            hi: l + slack,
        }));
    }
    let max = m.data.iter().max().cloned().unwrap_or_else(Rational::zero);
    if max.is_zero() {
        return Ok(None);
    }
    let a: Vec<Vec<f64>> = (0..m.rows)
        .map(|i| (0..m.cols).map(|j| rational_to_f64(&(m.get(i, j) / &max))).collect())
        .collect();
    let e = float_spr(&a, rel_tol);
    if e.hi == 0.0 {
        return Ok(None);
    }
    let ls = rational_ln(&max);
    Ok(Some(Enclosure {
        lo: ls + e.lo.ln(),
        hi: ls + e.hi.ln(),
    }))
}

/// Enclosure `[lo, hi]` of the spectral radius with `hi - lo ≤ tol`
/// (up to floating-point resolution). Exact for triangular matrices.
pub fn spectral_radius(m: &RatMatrix, tol: f64) -> Result<Enclosure, AnalysisError> {
    check_square(m)?;
    if let Some(d) = triangular_spr(m) {
        return Ok(Enclosure::point(rational_to_f64(&d)));
    }
    let max = m.data.iter().max().cloned().unwrap_or_else(Rational::zero);
    if max.is_zero() {
        return Ok(Enclosure::point(0.0));
    }
    let scale = rational_to_f64(&max);
    let a: Vec<Vec<f64>> = (0..m.rows)
        .map(|i| (0..m.cols).map(|j| rational_to_f64(&(m.get(i, j) / &max))).collect())
        .collect();
    let rel = (tol / scale).clamp(f64::EPSILON, 1e-3);
    let e = float_spr(&a, rel);
    Ok(Enclosure {
        lo: e.lo * scale,
        hi: e.hi * scale,
    })
}

/// `log spr(M) / log L` with bounds from the enclosures of both logs.
pub fn dimension_from(length: &ParamValue, m: &RatMatrix) -> Result<DimensionEstimate, AnalysisError> {
    let s = ln_spr(m, 1e-14)?.ok_or(AnalysisError::ZeroSpectralRadius)?;
    let (l_lo, l_hi) = length.ln_enclosure();
    let l_mid = 0.5 * (l_lo + l_hi);
    let slack = 4.0 * f64::EPSILON * l_mid.abs();
    let (l_lo, l_hi) = (l_lo - slack, (l_hi + slack).min(-f64::MIN_POSITIVE));
    let cands = [s.lo / l_lo, s.lo / l_hi, s.hi / l_lo, s.hi / l_hi];
    Ok(DimensionEstimate {
        value: s.mid() / l_mid,
        lo: cands.iter().cloned().fold(f64::INFINITY, f64::min),
        hi: cands.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Local dimension at the periodic point with period `cycle`.
pub fn periodic_dimension(
    g: &TransitionGraph,
    cycle: &[usize],
    probs: &[Rational],
) -> Result<DimensionEstimate, AnalysisError> {
    let p = path_data(g, cycle)?;
    if !p.is_cycle() {
        return Err(AnalysisError::NotAdmissible("not a cycle".into()));
    }
    dimension_from(&p.length, &p.matrix.eval(probs))
}
