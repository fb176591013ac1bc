//! TOML run configuration.
//!
//! ```toml
//! format_version = 1
//! probabilities = ["1/3", "1/3", "1/3"]
//!
//! [[parameters]]
//! name = "rho"
//! kind = "rational"        # rational | generic | algebraic
//! value = "1/2"            # generic: witness = "..."; algebraic: minpoly, interval
//!
//! [[maps]]
//! ratio = "rho"
//! offset = "0"
//!
//! [budget]                 # optional
//! max_vertices = 10000
//!
//! [analysis]               # optional
//! q = [-2, -1, 0, 1, 2]
//! t_min = "1/4096"
//! ```

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

use crate::engine::Budget;
use crate::field::{parse_expr, parse_univariate, ExprError, ParamValue, ParameterContext, Rational};
use crate::ifs::{Ifs, Similarity};

pub const FORMAT_VERSION: i64 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: {message}")]
    Validation {
        line: usize,
        column: usize,
        message: String,
    },
}

impl ConfigError {
    pub fn kind(&self) -> &'static str {
        match self {
            ConfigError::Parse { .. } => "ParseError",
            ConfigError::Validation { .. } => "ValidationError",
        }
    }

    pub fn location(&self) -> (usize, usize) {
        match self {
            ConfigError::Parse { line, column, .. } | ConfigError::Validation { line, column, .. } => {
                (*line, *column)
            }
        }
    }

    pub fn message(&self) -> &str {
        match self {
            ConfigError::Parse { message, .. } | ConfigError::Validation { message, .. } => message,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Text(String),
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Int(i) => write!(f, "{i}"),
            Number::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Rational,
    Generic,
    Algebraic,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ParamDecl {
    pub name: Spanned<String>,
    pub kind: Spanned<ParamKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Spanned<Number>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Spanned<Number>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minpoly: Option<Spanned<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<Spanned<Vec<Number>>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MapDecl {
    pub ratio: Spanned<Number>,
    pub offset: Spanned<Number>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BudgetDecl {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_vertices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_oracle_states: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_paths: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AnalysisDecl {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_min: Option<Spanned<Number>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_cycle_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump_depth: Option<u32>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputDecl {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dot: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub format_version: Spanned<i64>,
    pub probabilities: Spanned<Vec<Number>>,
    #[serde(default)]
    pub parameters: Vec<ParamDecl>,
    pub maps: Spanned<Vec<MapDecl>>,
    #[serde(default)]
    pub budget: BudgetDecl,
    #[serde(default)]
    pub analysis: AnalysisDecl,
    #[serde(default)]
    pub output: OutputDecl,
}

#[derive(Clone, Debug)]
pub struct AnalysisOptions {
    pub q: Vec<f64>,
    pub t_min: Rational,
    pub schedule_len: usize,
    pub max_cycle_len: usize,
    pub pump_depth: u32,
    pub max_paths: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            q: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            t_min: Rational::new(1.into(), 4096.into()),
            schedule_len: 12,
            max_cycle_len: 8,
            pump_depth: 4,
            max_paths: 2_000_000,
        }
    }
}

/// A validated configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub context: Arc<ParameterContext>,
    pub ifs: Ifs,
    pub budget: Budget,
    pub analysis: AnalysisOptions,
    pub output: OutputDecl,
}

impl RunConfig {
    /// Canonical TOML text that parses back to an equal configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.raw).expect("raw config serializes")
    }
}

struct Locator<'a> {
    text: &'a str,
    errors: Vec<ConfigError>,
}

impl Locator<'_> {
    fn position(&self, offset: usize) -> (usize, usize) {
        let offset = offset.min(self.text.len());
        let before = &self.text[..offset];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, col)
    }

    fn fail(&mut self, span: Range<usize>, message: impl Into<String>) {
        let (line, column) = self.position(span.start);
        self.errors.push(ConfigError::Validation {
            line,
            column,
            message: message.into(),
        });
    }

    /// Offset of the expression text inside a (possibly quoted) value.
    fn expr_offset(&self, span: &Range<usize>, col: usize) -> usize {
        let raw = self.text.get(span.clone()).unwrap_or("");
        let skip = usize::from(raw.starts_with('"') || raw.starts_with('\''));
        let inner = &raw[skip..];
        let bytes: usize = inner.chars().take(col.saturating_sub(1)).map(char::len_utf8).sum();
        span.start + skip + bytes
    }

    fn expr(&mut self, ctx: &Arc<ParameterContext>, v: &Spanned<Number>, what: &str) -> Option<ParamValue> {
        let text = v.get_ref().to_string();
        match parse_expr(ctx, &text) {
            Ok(x) => Some(x),
            Err(ExprError { column, message }) => {
                let at = self.expr_offset(&v.span(), column);
                self.fail(at..at, format!("{what}: {message}"));
                None
            }
        }
    }

    fn rational(&mut self, v: &Spanned<Number>, what: &str) -> Option<Rational> {
        let ctx = ParameterContext::rationals();
        let x = self.expr(&ctx, v, what)?;
        match x.as_rational() {
            Some(q) => Some(q),
            None => {
                self.fail(v.span(), format!("{what} must be a rational number"));
                None
            }
        }
    }
}

fn parse_error(text: &str, e: toml::de::Error) -> ConfigError {
    let loc = Locator {
        text,
        errors: Vec::new(),
    };
    let (line, column) = e.span().map_or((1, 1), |s| loc.position(s.start));
    ConfigError::Parse {
        line,
        column,
        message: e.message().to_string(),
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigErrors(vec![parse_error(text, e)]))?;
    validate(text, raw)
}

fn validate(text: &str, raw: RawConfig) -> Result<RunConfig, ConfigErrors> {
    let mut loc = Locator {
        text,
        errors: Vec::new(),
    };
    if *raw.format_version.get_ref() != FORMAT_VERSION {
        loc.fail(
            raw.format_version.span(),
            format!(
                "unsupported format_version {}; expected {FORMAT_VERSION}",
                raw.format_version.get_ref()
            ),
        );
    }

    let mut builder = ParameterContext::builder();
    for p in &raw.parameters {
        let name = p.name.get_ref().as_str();
        match p.kind.get_ref() {
            ParamKind::Rational => match &p.value {
                Some(v) => {
                    if let Some(q) = loc.rational(v, &format!("value of '{name}'")) {
                        builder = builder.rational(name, q);
                    }
                }
                None => loc.fail(p.kind.span(), format!("rational parameter '{name}' needs a value")),
            },
            ParamKind::Generic => match &p.witness {
                Some(w) => {
                    if let Some(q) = loc.rational(w, &format!("witness of '{name}'")) {
                        builder = builder.generic(name, q);
                    }
                }
                None => loc.fail(p.kind.span(), format!("generic parameter '{name}' needs a witness")),
            },
            ParamKind::Algebraic => {
                let (Some(mp), Some(iv)) = (&p.minpoly, &p.interval) else {
                    loc.fail(
                        p.kind.span(),
                        format!("algebraic parameter '{name}' needs minpoly and interval"),
                    );
                    continue;
                };
                let poly = match parse_univariate(mp.get_ref(), "x") {
                    Ok(u) => Some(u),
                    Err(e) => {
                        let at = loc.expr_offset(&mp.span(), e.column);
                        loc.fail(at..at, format!("minpoly of '{name}': {}", e.message));
                        None
                    }
                };
                let ends: Vec<Option<Rational>> = iv
                    .get_ref()
                    .iter()
                    .map(|n| {
                        let s = Spanned::new(iv.span(), n.clone());
                        loc.rational(&s, &format!("interval of '{name}'"))
                    })
                    .collect();
                if ends.len() != 2 {
                    loc.fail(iv.span(), format!("interval of '{name}' needs two endpoints"));
                    continue;
                }
                if let (Some(poly), Some(lo), Some(hi)) = (poly, ends[0].clone(), ends[1].clone()) {
                    builder = builder.algebraic(name, poly, lo, hi);
                }
            }
        }
    }
    let first_param_span = raw.parameters.first().map_or(0..0, |p| p.name.span());
    let ctx = if loc.errors.is_empty() {
        match builder.build() {
            Ok(c) => Some(c),
            Err(e) => {
                loc.fail(first_param_span, format!("parameters: {e}"));
                None
            }
        }
    } else {
        None
    };

    let mut probs = Vec::new();
    for n in raw.probabilities.get_ref() {
        let s = Spanned::new(raw.probabilities.span(), n.clone());
        if let Some(q) = loc.rational(&s, "probability") {
            if q <= Rational::zero() {
                loc.fail(raw.probabilities.span(), format!("probability {q} is not positive"));
            }
            probs.push(q);
        }
    }
    if probs.len() == raw.probabilities.get_ref().len() {
        let sum = probs.iter().fold(Rational::zero(), |a, b| a + b);
        if !sum.is_one() {
            loc.fail(raw.probabilities.span(), format!("probabilities sum to {sum}, not 1"));
        }
    }
    if raw.maps.get_ref().len() != raw.probabilities.get_ref().len() {
        loc.fail(
            raw.probabilities.span(),
            format!(
                "{} maps but {} probabilities",
                raw.maps.get_ref().len(),
                raw.probabilities.get_ref().len()
            ),
        );
    }

    let mut maps = Vec::new();
    if let Some(ctx) = &ctx {
        for (i, m) in raw.maps.get_ref().iter().enumerate() {
            let r = loc.expr(ctx, &m.ratio, &format!("ratio of map {}", i + 1));
            let o = loc.expr(ctx, &m.offset, &format!("offset of map {}", i + 1));
            if let (Some(r), Some(o)) = (r, o) {
                maps.push(Similarity::new(r, o));
            }
        }
    }

    let analysis = analysis_options(&mut loc, &raw);
    let mut budget = Budget::default();
    if let Some(v) = raw.budget.max_vertices {
        budget.max_vertices = v;
    }
    if let Some(v) = raw.budget.max_oracle_states {
        budget.max_oracle_states = v;
    }

    let ifs = match &ctx {
        Some(ctx) if loc.errors.is_empty() => match Ifs::new(ctx.clone(), maps, probs) {
            Ok(ifs) => Some(ifs),
            Err(e) => {
                let span = match &e {
                    crate::ifs::IfsError::RatioOutOfRange { index, .. } => raw
                        .maps
                        .get_ref()
                        .get(*index)
                        .map_or(raw.maps.span(), |m| m.ratio.span()),
                    crate::ifs::IfsError::ProbabilityCount { .. }
                    | crate::ifs::IfsError::NonPositiveProbability { .. }
                    | crate::ifs::IfsError::ProbabilitySum(_) => raw.probabilities.span(),
                    _ => raw.maps.span(),
                };
                loc.fail(span, e.to_string());
                None
            }
        },
        _ => None,
    };
    match (ifs, ctx, analysis) {
        (Some(ifs), Some(context), Some(analysis)) if loc.errors.is_empty() => Ok(RunConfig {
            output: raw.output.clone(),
            raw,
            context,
            ifs,
            budget,
            analysis,
        }),
        _ => {
            if loc.errors.is_empty() {
                loc.fail(0..0, "invalid configuration");
            }
            Err(ConfigErrors(loc.errors))
        }
    }
}

fn analysis_options(loc: &mut Locator<'_>, raw: &RawConfig) -> Option<AnalysisOptions> {
    let mut out = AnalysisOptions::default();
    let a = &raw.analysis;
    let before = loc.errors.len();
    if let Some(q) = &a.q {
        if q.is_empty() || q.iter().any(|x| !x.is_finite()) {
            loc.fail(0..0, "analysis.q must be a non-empty list of finite numbers");
        }
        out.q = q.clone();
    }
    if let Some(t) = &a.t_min {
        if let Some(t_min) = loc.rational(t, "t_min") {
            if t_min <= Rational::zero() || t_min >= Rational::one() {
                loc.fail(t.span(), "t_min must lie in (0, 1)");
            }
            out.t_min = t_min;
        }
    }
    if let Some(k) = a.schedule_len {
        if k < 2 {
            loc.fail(0..0, "analysis.schedule_len must be at least 2");
        }
        out.schedule_len = k;
    }
    if let Some(m) = a.max_cycle_len {
        out.max_cycle_len = m;
    }
    if let Some(d) = a.pump_depth {
        out.pump_depth = d;
    }
    if let Some(p) = raw.budget.max_paths {
        out.max_paths = p;
    }
    (loc.errors.len() == before).then_some(out)
}
