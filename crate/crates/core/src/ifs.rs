//! Similarities on the line, word composition, generation cuts and
//! normalization of the attractor's convex hull to `[0,1]`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed};
use thiserror::Error;

use crate::field::{ContextExt, FieldError, ParamValue, ParameterContext, Rational};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum IfsError {
    #[error("an IFS needs at least two maps, got {0}")]
    TooFewMaps(usize),
    #[error("{maps} maps but {probs} probabilities")]
    ProbabilityCount { maps: usize, probs: usize },
    #[error("probability {index} is not positive")]
    NonPositiveProbability { index: usize },
    #[error("probabilities sum to {0}, not 1")]
    ProbabilitySum(Rational),
    #[error("map {index} has ratio {ratio}, which is not in (-1,1)\\{{0}}")]
    RatioOutOfRange { index: usize, ratio: String },
    #[error("the attractor is a single point")]
    SingletonAttractor,
    #[error("generation must satisfy 0 < t <= 1")]
    GenerationOutOfRange,
    #[error("word cut exceeded the budget of {0} words")]
    CutBudgetExceeded(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// The affine map `x ↦ ratio·x + offset`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Similarity {
    pub ratio: ParamValue,
    pub offset: ParamValue,
}

impl fmt::Debug for Similarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x ↦ ({})·x + ({})", self.ratio, self.offset)
    }
}

impl fmt::Display for Similarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Similarity {
    pub fn new(ratio: ParamValue, offset: ParamValue) -> Self {
        Similarity { ratio, offset }
    }

    pub fn identity(ctx: &Arc<ParameterContext>) -> Self {
        Similarity::new(ctx.one(), ctx.zero())
    }

    pub fn context(&self) -> &Arc<ParameterContext> {
        self.ratio.context()
    }

    pub fn apply(&self, x: &ParamValue) -> ParamValue {
        &(&self.ratio * x) + &self.offset
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &Similarity) -> Similarity {
        Similarity {
            ratio: &self.ratio * &g.ratio,
            offset: &(&self.ratio * &g.offset) + &self.offset,
        }
    }

    /// `x ↦ (x - offset)/ratio` applied to `y`.
    pub fn preimage(&self, y: &ParamValue) -> Result<ParamValue, FieldError> {
        (y - &self.offset).checked_div(&self.ratio)
    }

    pub fn abs_ratio(&self) -> Result<ParamValue, FieldError> {
        self.ratio.abs()
    }

    /// Image of `[lo, hi]`, endpoints in ascending order.
    pub fn image(&self, lo: &ParamValue, hi: &ParamValue) -> Result<(ParamValue, ParamValue), FieldError> {
        let (a, b) = (self.apply(lo), self.apply(hi));
        Ok(if self.ratio.sign()? > 0 { (a, b) } else { (b, a) })
    }

    /// Preimage of the interval `(lo, hi)`, endpoints ascending.
    pub fn preimage_interval(
        &self,
        lo: &ParamValue,
        hi: &ParamValue,
    ) -> Result<(ParamValue, ParamValue), FieldError> {
        let (a, b) = (self.preimage(lo)?, self.preimage(hi)?);
        Ok(if self.ratio.sign()? > 0 { (a, b) } else { (b, a) })
    }

    /// Post-compose with the affine rescaling of `[lo, hi]` onto `[0,1]`.
    pub fn rescale(&self, lo: &ParamValue, hi: &ParamValue) -> Result<Similarity, FieldError> {
        let w = hi - lo;
        Ok(Similarity {
            ratio: self.ratio.checked_div(&w)?,
            offset: (&self.offset - lo).checked_div(&w)?,
        })
    }

    /// Canonical order: offset first, then ratio.
    pub fn canonical_cmp(&self, other: &Similarity) -> Result<Ordering, FieldError> {
        match self.offset.try_cmp(&other.offset)? {
            Ordering::Equal => self.ratio.try_cmp(&other.ratio),
            o => Ok(o),
        }
    }
}

/// Sorts with a fallible comparator; the first comparison error wins.
pub fn try_sort_by<T>(
    items: &mut [T],
    mut cmp: impl FnMut(&T, &T) -> Result<Ordering, FieldError>,
) -> Result<(), FieldError> {
    let mut err = None;
    items.sort_by(|a, b| match cmp(a, b) {
        Ok(o) => o,
        Err(e) => {
            err.get_or_insert(e);
            Ordering::Equal
        }
    });
    err.map_or(Ok(()), Err)
}

pub type Word = Vec<usize>;

#[derive(Clone, Debug)]
pub struct Ifs {
    ctx: Arc<ParameterContext>,
    maps: Vec<Similarity>,
    probs: Vec<Rational>,
}

impl Ifs {
    pub fn new(
        ctx: Arc<ParameterContext>,
        maps: Vec<Similarity>,
        probs: Vec<Rational>,
    ) -> Result<Self, IfsError> {
        if maps.len() < 2 {
            return Err(IfsError::TooFewMaps(maps.len()));
        }
        if probs.len() != maps.len() {
            return Err(IfsError::ProbabilityCount {
                maps: maps.len(),
                probs: probs.len(),
            });
        }
        if let Some(index) = probs.iter().position(|p| !p.is_positive()) {
            return Err(IfsError::NonPositiveProbability { index });
        }
        let sum: Rational = probs.iter().sum();
        if !sum.is_one() {
            return Err(IfsError::ProbabilitySum(sum));
        }
        for (index, m) in maps.iter().enumerate() {
            let a = m.abs_ratio()?;
            if a.sign()? <= 0 || (&ctx.one() - &a).sign()? <= 0 {
                return Err(IfsError::RatioOutOfRange {
                    index,
                    ratio: m.ratio.to_string(),
                });
            }
        }
        Ok(Ifs { ctx, maps, probs })
    }

    pub fn context(&self) -> &Arc<ParameterContext> {
        &self.ctx
    }

    pub fn maps(&self) -> &[Similarity] {
        &self.maps
    }

    pub fn probabilities(&self) -> &[Rational] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// Same maps, different weights.
    pub fn with_probabilities(&self, probs: Vec<Rational>) -> Result<Ifs, IfsError> {
        Ifs::new(self.ctx.clone(), self.maps.clone(), probs)
    }

    pub fn compose(&self, word: &[usize]) -> Similarity {
        word.iter()
            .fold(Similarity::identity(&self.ctx), |acc, &i| acc.compose(&self.maps[i]))
    }

    pub fn word_probability(&self, word: &[usize]) -> Rational {
        word.iter().fold(Rational::one(), |acc, &i| acc * &self.probs[i])
    }

    pub fn generation_cut(&self, t: &ParamValue) -> Result<Vec<Word>, IfsError> {
        self.generation_cut_bounded(t, usize::MAX)
    }

    /// `Λ_t = {σ : |r_σ| < t ≤ |r_σ⁻|}` by pruned descent of the word tree.
    pub fn generation_cut_bounded(&self, t: &ParamValue, max_words: usize) -> Result<Vec<Word>, IfsError> {
        if t.sign()? <= 0 || (&self.ctx.one() - t).sign()? < 0 {
            return Err(IfsError::GenerationOutOfRange);
        }
        let abs: Vec<ParamValue> = self
            .maps
            .iter()
            .map(Similarity::abs_ratio)
            .collect::<Result<_, _>>()?;
        let mut out = Vec::new();
        let mut stack: Vec<(Word, ParamValue)> = (0..self.len())
            .rev()
            .map(|i| (vec![i], abs[i].clone()))
            .collect();
        while let Some((w, r)) = stack.pop() {
            if r.lt(t)? {
                if out.len() >= max_words {
                    return Err(IfsError::CutBudgetExceeded(max_words));
                }
                out.push(w);
            } else {
                for i in (0..self.len()).rev() {
                    let mut w2 = w.clone();
                    w2.push(i);
                    stack.push((w2, &r * &abs[i]));
                }
            }
        }
        Ok(out)
    }

    /// Endpoints `[a, b]` of the convex hull of the attractor.
    pub fn hull(&self) -> Result<(ParamValue, ParamValue), IfsError> {
        let one = self.ctx.one();
        let zero = self.ctx.zero();
        for si in &self.maps {
            for sj in &self.maps {
                // a = S_i(a or b), b = S_j(b or a), depending on orientation
                let pi = si.ratio.sign()? > 0;
                let pj = sj.ratio.sign()? > 0;
                let (c11, c12) = if pi { (&one - &si.ratio, zero.clone()) } else { (one.clone(), -&si.ratio) };
                let (c21, c22) = if pj { (zero.clone(), &one - &sj.ratio) } else { (-&sj.ratio, one.clone()) };
                let det = &(&c11 * &c22) - &(&c12 * &c21);
                if det.is_zero() {
                    continue;
                }
                let a = (&(&si.offset * &c22) - &(&c12 * &sj.offset)).checked_div(&det)?;
                let b = (&(&c11 * &sj.offset) - &(&c21 * &si.offset)).checked_div(&det)?;
                if b.lt(&a)? {
                    continue;
                }
                if self.hull_is_invariant(&a, &b)? {
                    if a == b {
                        return Err(IfsError::SingletonAttractor);
                    }
                    return Ok((a, b));
                }
            }
        }
        Err(IfsError::SingletonAttractor)
    }

    fn hull_is_invariant(&self, a: &ParamValue, b: &ParamValue) -> Result<bool, IfsError> {
        let mut lo: Option<ParamValue> = None;
        let mut hi: Option<ParamValue> = None;
        for m in &self.maps {
            let (x, y) = m.image(a, b)?;
            lo = Some(match lo {
                Some(l) => l.min(&x)?,
                None => x,
            });
            hi = Some(match hi {
                Some(h) => h.max(&y)?,
                None => y,
            });
        }
        Ok(lo.as_ref() == Some(a) && hi.as_ref() == Some(b))
    }

    /// Conjugate by the affine map taking the hull onto `[0,1]`.
    pub fn normalize_hull(&self) -> Result<Ifs, IfsError> {
        let (a, b) = self.hull()?;
        let w = &b - &a;
        let maps = self
            .maps
            .iter()
            .map(|m| {
                let off = (&(&(&m.ratio * &a) + &m.offset) - &a).checked_div(&w)?;
                Ok(Similarity::new(m.ratio.clone(), off))
            })
            .collect::<Result<Vec<_>, FieldError>>()?;
        Ok(Ifs {
            ctx: self.ctx.clone(),
            maps,
            probs: self.probs.clone(),
        })
    }

    pub fn is_hull_normalized(&self) -> Result<bool, IfsError> {
        let (a, b) = self.hull()?;
        Ok(a.is_zero() && b.is_one())
    }
}
