//! Randomized source/follow-up generation with a Bayes-factor stopping rule.
//!
//! Each iteration picks a source (a fresh sample or a perturbation of the
//! most promising source so far), then draws follow-ups from it until one
//! fails or `K` consecutive follow-ups pass, where `K` is the smallest
//! integer with `θ^K ≤ 1/B`.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{Sut, SutError};
use crate::money::Money;
use crate::record::{Field, TaxReturnInput};
use crate::relation::{DomainBounds, FieldRange, MetamorphicRelation, SamplingDomain};

/// Consecutive source rejections before a premise is declared unsatisfiable.
pub const MAX_REJECTIONS: u32 = 10_000;
/// Consecutive engine errors before a run is aborted.
pub const MAX_CONSECUTIVE_SUT_ERRORS: u32 = 10;
const PERTURB_ATTEMPTS: u32 = 32;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("relation {relation}: premise unsatisfiable after {attempts} consecutive rejections")]
    UnsatisfiablePremise { relation: u8, attempts: u32 },
    #[error("relation {relation}: {consecutive} consecutive engine errors, last: {last}")]
    Sut { relation: u8, consecutive: u32, last: SutError },
}

/// How elapsed time is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockMode {
    Wall,
    /// Each engine evaluation advances time by a fixed tick; runs become
    /// reproducible down to their timestamps.
    Virtual { tick_us: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub bayes_factor: f64,
    pub theta: f64,
    /// Deviance above which a case is labelled failed.
    pub delta: Money,
    #[serde(with = "duration_secs")]
    pub timeout: Duration,
    pub seed: u64,
    /// Hard cap on labelled cases per relation.
    pub max_cases: u64,
    pub clock: ClockMode,
    pub bounds: DomainBounds,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            bayes_factor: 100.0,
            theta: 0.95,
            delta: Money::from_cents(95),
            timeout: Duration::from_secs(600),
            seed: 42,
            max_cases: 100_000,
            clock: ClockMode::Wall,
            bounds: DomainBounds::default(),
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        required_consecutive_passes(self.bayes_factor, self.theta)?;
        if self.delta < Money::ZERO {
            return Err(GenError::InvalidParameter("delta must be non-negative".into()));
        }
        let b = &self.bounds;
        if [b.agi_max, b.max_withholding, b.max_credit, b.max_itemized]
            .iter()
            .any(|m| *m < Money::ZERO)
            || b.max_age < crate::record::MIN_AGE
        {
            return Err(GenError::InvalidParameter("domain bounds out of range".into()));
        }
        Ok(())
    }
}

mod duration_secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

/// Smallest `K` with `K ≥ (−log₂ B) / (log₂ θ)`.
pub fn required_consecutive_passes(bayes_factor: f64, theta: f64) -> Result<u64, GenError> {
    if !(bayes_factor >= 1.0 && bayes_factor.is_finite()) {
        return Err(GenError::InvalidParameter(format!("Bayes factor {bayes_factor} must be ≥ 1")));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(GenError::InvalidParameter(format!("theta {theta} must lie in (0, 1)")));
    }
    let bound = -bayes_factor.log2() / theta.log2();
    // absorb representation error when the bound is an exact integer
    Ok((bound - 1e-9).ceil().max(0.0) as u64)
}

/// Sources of one case tuple: `[x]` or `[x, x′]`, tagged with the disjunct
/// that generated them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Source {
    pub spec: usize,
    pub records: Vec<TaxReturnInput>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Failed,
    Passed,
}

/// Records in order `x, y` or `x, x′, y, y′`, and their engine outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseTuple {
    pub spec: usize,
    pub records: Vec<TaxReturnInput>,
    pub outputs: Vec<Money>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledCase {
    pub tuple: CaseTuple,
    pub deviance: Money,
    pub label: Label,
    /// Microseconds since the run started.
    pub t_us: u64,
}

impl LabeledCase {
    pub fn wall_clock(&self) -> f64 {
        self.t_us as f64 / 1e6
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Falsified,
    StatisticallyPassed,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub relation_id: u8,
    pub verdict: Verdict,
    pub cases: Vec<LabeledCase>,
    pub n_pass: u64,
    pub n_fail: u64,
    pub first_failure_time: Option<f64>,
    pub max_deviance: Money,
    pub argmax_case: Option<CaseTuple>,
    pub required_passes: u64,
    /// Sources retired after `K` consecutive passes.
    pub sources_passed: u64,
    /// Sources retired by a failure.
    pub sources_failed: u64,
    /// The run stopped in the middle of a source's follow-ups.
    pub truncated: bool,
    pub elapsed_secs: f64,
    pub config: GeneratorConfig,
}

struct Clock {
    mode: ClockMode,
    start: Instant,
    evals: u64,
}

impl Clock {
    fn new(mode: ClockMode) -> Clock {
        Clock { mode, start: Instant::now(), evals: 0 }
    }

    fn elapsed(&self) -> Duration {
        match self.mode {
            ClockMode::Wall => self.start.elapsed(),
            ClockMode::Virtual { tick_us } => Duration::from_micros(self.evals.saturating_mul(tick_us)),
        }
    }
}

fn draw(range: &FieldRange, rng: &mut dyn RngCore) -> i64 {
    match range {
        FieldRange::Span(lo, hi) => rng.gen_range(*lo..=*hi),
        FieldRange::OneOf(vals) => *vals.choose(rng).expect("non-empty range"),
    }
}

fn unsatisfiable(rel: &MetamorphicRelation) -> GenError {
    GenError::UnsatisfiablePremise { relation: rel.id, attempts: MAX_REJECTIONS }
}

/// Draws `x` field by field from the disjunct's ranges, plus `x′` for pairs.
fn draw_sources(
    rel: &MetamorphicRelation,
    spec_idx: usize,
    domain: &SamplingDomain,
    rng: &mut dyn RngCore,
) -> Result<Vec<TaxReturnInput>, GenError> {
    let spec = &rel.specs[spec_idx];
    let mut x = TaxReturnInput::new(crate::record::FilingStatus::Single);
    for f in Field::ALL {
        let range = spec.source_range(f, domain);
        if range.is_empty() {
            return Err(unsatisfiable(rel));
        }
        x.set(f, draw(&range, rng));
    }
    x.canonicalize();
    let mut out = vec![x];
    if let Some(pair) = &spec.pair {
        out.push(draw_pair(&out[0], pair, domain, rng).ok_or_else(|| unsatisfiable(rel))?);
    }
    Ok(out)
}

fn draw_pair(
    x: &TaxReturnInput,
    pair: &crate::relation::PairSpec,
    domain: &SamplingDomain,
    rng: &mut dyn RngCore,
) -> Option<TaxReturnInput> {
    let mut xp = x.clone();
    for &f in &pair.links {
        let range = pair
            .ranges
            .iter()
            .filter(|(g, _)| *g == f)
            .fold(domain.range(f).clone(), |acc, (_, r)| acc.intersect(r));
        if range.is_empty() {
            return None;
        }
        xp.set(f, draw(&range, rng));
    }
    Some(xp)
}

/// Rejection-samples sources satisfying one of the relation's disjuncts.
pub fn sample_source(
    rel: &MetamorphicRelation,
    domain: &SamplingDomain,
    rng: &mut dyn RngCore,
) -> Result<Source, GenError> {
    for _ in 0..MAX_REJECTIONS {
        let spec = rng.gen_range(0..rel.specs.len());
        let records = draw_sources(rel, spec, domain, rng)?;
        if rel.specs[spec].source_constraints(&records) {
            return Ok(Source { spec, records });
        }
    }
    Err(unsatisfiable(rel))
}

/// Moves `base` to a neighbour by redrawing one field of `x`. Returns `None`
/// if no neighbour satisfying the source constraints was found.
pub fn perturb_source(
    rel: &MetamorphicRelation,
    base: &Source,
    domain: &SamplingDomain,
    rng: &mut dyn RngCore,
) -> Option<Source> {
    let spec = &rel.specs[base.spec];
    let free: Vec<(Field, FieldRange)> = Field::ALL
        .iter()
        .map(|&f| (f, spec.source_range(f, domain)))
        .filter(|(_, r)| !r.is_empty() && !r.is_singleton())
        .collect();
    if free.is_empty() {
        return None;
    }
    for _ in 0..PERTURB_ATTEMPTS {
        let (f, range) = free.choose(rng)?;
        let mut x = base.records[0].clone();
        x.set(*f, draw(range, rng));
        if *f == Field::Sts && x.sts.is_married() && !base.records[0].sts.is_married() {
            for g in [Field::SAge, Field::SBlind] {
                x.set(g, draw(&spec.source_range(g, domain), rng));
            }
        }
        x.canonicalize();
        let mut records = vec![x];
        if let Some(pair) = &spec.pair {
            let mut xp = records[0].clone();
            for &l in &pair.links {
                xp.set(l, base.records[1].get(l));
            }
            records.push(xp);
        }
        if records != base.records && spec.source_constraints(&records) {
            return Some(Source { spec: base.spec, records });
        }
    }
    None
}

/// Draws follow-ups for `source`: equal outside `L`, exception fields drawn
/// under the disjunct's follow-up rules. `None` means the rules cannot be
/// met for this source and a new source should be drawn.
pub fn uniform_perturb(
    rel: &MetamorphicRelation,
    source: &Source,
    domain: &SamplingDomain,
    rng: &mut dyn RngCore,
) -> Option<Vec<TaxReturnInput>> {
    let spec = &rel.specs[source.spec];
    let x = &source.records[0];
    let mut y = x.clone();
    for rule in &spec.followup {
        let range = rule.range(x, domain);
        if range.is_empty() {
            return None;
        }
        y.set(rule.field(), draw(&range, rng));
    }
    let followups: Vec<TaxReturnInput> = source
        .records
        .iter()
        .map(|s| {
            let mut f = s.clone();
            for &l in &spec.exception_labels {
                f.set(l, y.get(l));
            }
            f
        })
        .collect();
    spec.followup_constraints(&source.records, &followups).then_some(followups)
}

fn evaluate<S: Sut + ?Sized>(
    sut: &mut S,
    records: &[TaxReturnInput],
    clock: &mut Clock,
) -> Result<Vec<Money>, SutError> {
    records
        .iter()
        .map(|r| {
            clock.evals += 1;
            sut.federal_tax_return(r)
        })
        .collect()
}

fn note_error(count: &mut u32, relation: u8, e: SutError) -> Result<(), GenError> {
    *count += 1;
    if *count >= MAX_CONSECUTIVE_SUT_ERRORS {
        return Err(GenError::Sut { relation, consecutive: *count, last: e });
    }
    Ok(())
}

/// Per-relation random stream: `seed ⊕ relation id`.
pub fn relation_rng(seed: u64, relation_id: u8) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ relation_id as u64)
}

/// Generates and labels cases for one relation until the timeout or case cap.
pub fn run_relation<S: Sut + ?Sized>(
    sut: &mut S,
    rel: &MetamorphicRelation,
    config: &GeneratorConfig,
) -> Result<RunResult, GenError> {
    config.validate()?;
    let k_required = required_consecutive_passes(config.bayes_factor, config.theta)?;
    let domain = SamplingDomain::new(&config.bounds);
    let mut rng = relation_rng(config.seed, rel.id);
    let mut clock = Clock::new(config.clock);

    let mut promising = sample_source(rel, &domain, &mut rng)?;
    let mut promising_dev = Money::ZERO;
    let mut first_source = true;

    let mut cases: Vec<LabeledCase> = Vec::new();
    let (mut n_pass, mut n_fail) = (0u64, 0u64);
    let (mut sources_passed, mut sources_failed) = (0u64, 0u64);
    let mut first_failure_time = None;
    let mut max_deviance = Money::ZERO;
    let mut argmax_case: Option<CaseTuple> = None;
    let mut truncated = false;
    let mut sut_errors = 0u32;

    let stop = |clock: &Clock, n: usize| clock.elapsed() >= config.timeout || n as u64 >= config.max_cases;

    'sources: while !stop(&clock, cases.len()) {
        let source = if std::mem::take(&mut first_source) {
            promising.clone()
        } else if rng.gen_bool(0.5) {
            sample_source(rel, &domain, &mut rng)?
        } else {
            match perturb_source(rel, &promising, &domain, &mut rng) {
                Some(s) => s,
                None => sample_source(rel, &domain, &mut rng)?,
            }
        };
        let source_out = match evaluate(sut, &source.records, &mut clock) {
            Ok(v) => v,
            Err(e) => {
                note_error(&mut sut_errors, rel.id, e)?;
                continue;
            }
        };
        sut_errors = 0;

        let mut streak = 0u64;
        loop {
            if stop(&clock, cases.len()) {
                truncated = true;
                break 'sources;
            }
            let Some(followups) = uniform_perturb(rel, &source, &domain, &mut rng) else {
                continue 'sources;
            };
            let follow_out = match evaluate(sut, &followups, &mut clock) {
                Ok(v) => v,
                Err(e) => {
                    note_error(&mut sut_errors, rel.id, e)?;
                    continue;
                }
            };
            sut_errors = 0;

            let mut records = source.records.clone();
            records.extend(followups);
            let mut outputs = source_out.clone();
            outputs.extend(follow_out);
            let deviance = rel.deviance(&outputs).expect("tuple arity matches relation");
            let label = if deviance > config.delta { Label::Failed } else { Label::Passed };
            let t_us = clock.elapsed().as_micros() as u64;
            let tuple = CaseTuple { spec: source.spec, records, outputs };
            if deviance > max_deviance || argmax_case.is_none() {
                max_deviance = max_deviance.max(deviance);
                argmax_case = Some(tuple.clone());
            }
            cases.push(LabeledCase { tuple, deviance, label, t_us });

            match label {
                Label::Failed => {
                    n_fail += 1;
                    sources_failed += 1;
                    first_failure_time.get_or_insert(t_us as f64 / 1e6);
                    if deviance > promising_dev {
                        promising = source.clone();
                        promising_dev = deviance;
                    }
                    continue 'sources;
                }
                Label::Passed => {
                    n_pass += 1;
                    streak += 1;
                    if streak >= k_required {
                        sources_passed += 1;
                        continue 'sources;
                    }
                }
            }
        }
    }

    let verdict = if n_fail > 0 {
        Verdict::Falsified
    } else if sources_passed > 0 {
        Verdict::StatisticallyPassed
    } else {
        Verdict::Inconclusive
    };
    Ok(RunResult {
        relation_id: rel.id,
        verdict,
        n_pass,
        n_fail,
        first_failure_time,
        max_deviance,
        argmax_case: if cases.is_empty() { None } else { argmax_case },
        cases,
        required_passes: k_required,
        sources_passed,
        sources_failed,
        truncated,
        elapsed_secs: clock.elapsed().as_secs_f64(),
        config: config.clone(),
    })
}

/// Runs several relations on a bounded pool of workers, each owning the
/// engine returned by `make_sut`. Results come back ordered by relation id.
pub fn run_relations<S, F>(
    relations: &[MetamorphicRelation],
    config: &GeneratorConfig,
    workers: usize,
    make_sut: F,
) -> Vec<(u8, Result<RunResult, GenError>)>
where
    S: Sut,
    F: Fn() -> Result<S, SutError> + Sync,
{
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(relations.len()));
    let workers = workers.clamp(1, relations.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                let mut sut = None;
                loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(rel) = relations.get(i) else { break };
                    if sut.is_none() {
                        match make_sut() {
                            Ok(s) => sut = Some(s),
                            Err(e) => {
                                let err = GenError::Sut { relation: rel.id, consecutive: 1, last: e };
                                results.lock().unwrap().push((rel.id, Err(err)));
                                continue;
                            }
                        }
                    }
                    let out = run_relation(sut.as_mut().unwrap(), rel, config);
                    results.lock().unwrap().push((rel.id, out));
                }
            });
        }
    });
    let mut results = results.into_inner().unwrap();
    results.sort_by_key(|(id, _)| *id);
    results
}
