use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::time::{Duration, Instant};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::naive::{naive_execute, union_sorted, NaiveLimits};
use super::operators::{child_join_attributes, ojm_step, orm_step, parent_join_attributes, som_step};
use super::{plans_for, predicted_ops, EngineError, JoinCardinality, OperatorPlan, PredictedOps};
use crate::ingest::open_source;
use crate::mapping::{DataIntegrationSystem, Mode, ObjectMap, OperatorKind};
use crate::structures::{CostCounters, PredicateJoinTupleTable, PredicateTupleTable};
use crate::writer::KgWriter;

#[derive(Debug, Clone, Copy)]
pub struct EngineOptions {
    /// Share one PJTT among plans joining the same parent on the same
    /// attributes. Turning this off builds one table per plan.
    pub reuse_pjtt: bool,
    /// Records between incremental emissions.
    pub batch_size: usize,
    pub deadline: Option<Instant>,
    pub max_materialized: Option<u64>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            reuse_pjtt: true,
            batch_size: 4096,
            deadline: None,
            max_materialized: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateReport {
    pub generated: u64,
    pub emitted: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorReport {
    pub map: String,
    pub predicate: String,
    pub kind: OperatorKind,
    pub counters: CostCounters,
    pub n_parent: Option<u64>,
    pub n_child: Option<u64>,
    /// Whether this plan paid for a PJTT build (optimized OJM only).
    pub built_pjtt: bool,
    pub predicted: PredictedOps,
    pub measured: u64,
    pub law_holds: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: Mode,
    pub predicates: BTreeMap<String, PredicateReport>,
    pub operators: Vec<OperatorReport>,
    pub totals: CostCounters,
    pub pjtt_builds: u64,
    pub lines_written: u64,
    /// True when some triples map failed and the output misses its triples.
    pub partial: bool,
    pub errors: Vec<String>,
    pub wall_time_secs: f64,
}

impl RunReport {
    pub fn laws_hold(&self) -> bool {
        self.operators.iter().all(|o| o.law_holds)
    }
}

fn operator_report(plan: &OperatorPlan, counters: CostCounters, join: Option<JoinCardinality>, built: bool) -> OperatorReport {
    let n_p = counters.triples_generated;
    let s_p = counters.kg_emissions;
    let predicted = predicted_ops(plan.kind, plan.mode, n_p, s_p, join).expect("measured counts are consistent");
    let (measured, law_holds) = match plan.mode {
        Mode::Optimized => {
            let m = counters.optimized_total();
            let consistent = counters.ptt_lookups == n_p && counters.ptt_insertions == s_p;
            (m, consistent && predicted.admits(m))
        }
        Mode::Naive => {
            let m = counters.naive_total();
            (m, m == predicted.exact + counters.sort_comparisons && predicted.admits(m))
        }
    };
    OperatorReport {
        map: plan.child.id.clone(),
        predicate: plan.pom.predicate.clone(),
        kind: plan.kind,
        counters,
        n_parent: join.map(|j| j.n_parent),
        n_child: join.map(|j| j.n_child),
        built_pjtt: built,
        predicted,
        measured,
        law_holds,
    }
}

struct Optimized<W: Write> {
    writer: KgWriter<W>,
    ptts: Vec<PredicateTupleTable>,
    ptt_index: HashMap<String, usize>,
    pjtts: Vec<PredicateJoinTupleTable>,
    pjtt_index: HashMap<(String, Vec<String>), usize>,
    pjtt_builds: u64,
}

impl<W: Write> Optimized<W> {
    fn ptt_for(&mut self, predicate: &str) -> usize {
        if let Some(&i) = self.ptt_index.get(predicate) {
            return i;
        }
        self.ptts.push(PredicateTupleTable::new(predicate));
        self.ptt_index.insert(predicate.to_owned(), self.ptts.len() - 1);
        self.ptts.len() - 1
    }

    /// Returns the PJTT slot for an OJM plan and whether it was built now.
    fn pjtt_for(
        &mut self,
        plan: &OperatorPlan,
        reuse: bool,
        counters: &mut CostCounters,
    ) -> Result<(usize, bool), EngineError> {
        let parent = plan.parent.as_ref().expect("OJM plans have a parent");
        let key = (parent.id.clone(), parent_join_attributes(plan));
        if reuse {
            if let Some(&i) = self.pjtt_index.get(&key) {
                return Ok((i, false));
            }
        }
        let records = open_source(&parent.logical_source).map_err(|e| EngineError::source(&parent.id, e))?;
        let table = PredicateJoinTupleTable::build(&parent.id, &parent.subject_map, records, key.1.clone(), counters)
            .map_err(|e| EngineError::source(&parent.id, e))?;
        self.pjtts.push(table);
        self.pjtt_builds += 1;
        let i = self.pjtts.len() - 1;
        if reuse {
            self.pjtt_index.insert(key, i);
        }
        Ok((i, true))
    }

    fn emit(&mut self, slots: &[usize]) -> Result<(), EngineError> {
        for &i in slots {
            self.writer.emit(&self.ptts[i])?;
        }
        Ok(())
    }
}

enum Step {
    Som(usize),
    Orm(usize),
    Ojm { ptt: usize, pjtt: usize, attrs: Vec<String> },
}

fn check_deadline(options: &EngineOptions, started: Instant) -> Result<(), EngineError> {
    match options.deadline {
        Some(d) if Instant::now() >= d => Err(EngineError::Timeout(started.elapsed())),
        _ => Ok(()),
    }
}

/// Runs one triples map's plans in a single pass over its source.
fn run_map_optimized<W: Write>(
    state: &mut Optimized<W>,
    plans: &[OperatorPlan],
    counters: &mut [CostCounters],
    built: &mut [bool],
    options: &EngineOptions,
    started: Instant,
) -> Result<(), EngineError> {
    let mut steps = Vec::with_capacity(plans.len());
    let mut slots = Vec::new();
    for (i, plan) in plans.iter().enumerate() {
        let ptt = state.ptt_for(&plan.pom.predicate);
        if !slots.contains(&ptt) {
            slots.push(ptt);
        }
        steps.push(match plan.kind {
            OperatorKind::SimpleObject => Step::Som(ptt),
            OperatorKind::ObjectReference => Step::Orm(ptt),
            OperatorKind::ObjectJoin => {
                let (pjtt, b) = state.pjtt_for(plan, options.reuse_pjtt, &mut counters[i])?;
                built[i] = b;
                Step::Ojm {
                    ptt,
                    pjtt,
                    attrs: child_join_attributes(plan),
                }
            }
        });
    }
    let Some(first) = plans.first() else {
        return Ok(());
    };
    let map = &first.child;
    let records = open_source(&map.logical_source).map_err(|e| EngineError::source(&map.id, e))?;
    let batch = options.batch_size.max(1);
    let mut failure = None;
    for (n, record) in records.enumerate() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                failure = Some(EngineError::source(&map.id, e));
                break;
            }
        };
        if let Some(subject) = map.subject_map.generate_string(&record) {
            for ((plan, step), c) in plans.iter().zip(&steps).zip(counters.iter_mut()) {
                match step {
                    Step::Som(p) => {
                        let ObjectMap::Simple(om) = &plan.pom.object else { unreachable!() };
                        som_step(om, &subject, &record, &mut state.ptts[*p], c);
                    }
                    Step::Orm(p) => {
                        let parent = plan.parent.as_ref().expect("ORM plans have a parent");
                        orm_step(&parent.subject_map, &subject, &record, &mut state.ptts[*p], c);
                    }
                    Step::Ojm { ptt, pjtt, attrs } => {
                        ojm_step(attrs, &subject, &record, &mut state.pjtts[*pjtt], &mut state.ptts[*ptt], c);
                    }
                }
            }
        }
        if (n + 1) % batch == 0 {
            state.emit(&slots)?;
            check_deadline(options, started)?;
        }
    }
    state.emit(&slots)?;
    failure.map_or(Ok(()), Err)
}

/// Executes every triples map of `dis` in document order, writing
/// N-Triples to `sink`. Source and classification failures of one map are
/// recorded in the report and the run continues; output, timeout and
/// resource failures abort the run.
pub fn run_system<W: Write>(
    dis: &DataIntegrationSystem,
    sink: W,
    options: &EngineOptions,
) -> Result<RunReport, EngineError> {
    let started = Instant::now();
    let mut report = RunReport {
        mode: dis.mode,
        predicates: BTreeMap::new(),
        operators: Vec::new(),
        totals: CostCounters::default(),
        pjtt_builds: 0,
        lines_written: 0,
        partial: false,
        errors: Vec::new(),
        wall_time_secs: 0.0,
    };
    let writer = match dis.mode {
        Mode::Optimized => run_optimized(dis, sink, options, started, &mut report)?,
        Mode::Naive => run_naive(dis, sink, options, started, &mut report)?,
    };
    report.lines_written = writer.lines_written();
    writer.finish()?;
    for op in &report.operators {
        report.totals += op.counters;
        let p = report.predicates.entry(op.predicate.clone()).or_default();
        p.generated += op.counters.triples_generated;
        if dis.mode == Mode::Optimized {
            p.emitted += op.counters.kg_emissions;
        }
    }
    report.wall_time_secs = started.elapsed().as_secs_f64();
    Ok(report)
}

fn fail_map(report: &mut RunReport, map: &str, e: impl std::fmt::Display) {
    report.partial = true;
    report.errors.push(format!("triples map '{map}': {e}"));
}

fn fatal(e: &EngineError) -> bool {
    matches!(e, EngineError::Write(_) | EngineError::Timeout(_) | EngineError::Resource { .. })
}

fn run_optimized<W: Write>(
    dis: &DataIntegrationSystem,
    sink: W,
    options: &EngineOptions,
    started: Instant,
    report: &mut RunReport,
) -> Result<KgWriter<W>, EngineError> {
    let mut state = Optimized {
        writer: KgWriter::new(sink),
        ptts: Vec::new(),
        ptt_index: HashMap::new(),
        pjtts: Vec::new(),
        pjtt_index: HashMap::new(),
        pjtt_builds: 0,
    };
    for map in &dis.mappings {
        let plans = match plans_for(dis, map, Mode::Optimized) {
            Ok(p) => p,
            Err(e) => {
                fail_map(report, &map.id, e);
                continue;
            }
        };
        let mut counters = vec![CostCounters::default(); plans.len()];
        let mut built = vec![false; plans.len()];
        let result = run_map_optimized(&mut state, &plans, &mut counters, &mut built, options, started);
        for ((plan, c), b) in plans.iter().zip(counters).zip(built) {
            let join = (plan.kind == OperatorKind::ObjectJoin).then_some(JoinCardinality {
                n_parent: c.pjtt_insertions,
                n_child: c.pjtt_probes,
            });
            report.operators.push(operator_report(plan, c, join, b));
        }
        if let Err(e) = result {
            if fatal(&e) {
                return Err(e);
            }
            fail_map(report, &map.id, e);
        }
    }
    report.pjtt_builds = state.pjtt_builds;
    Ok(state.writer)
}

fn run_naive<W: Write>(
    dis: &DataIntegrationSystem,
    sink: W,
    options: &EngineOptions,
    started: Instant,
    report: &mut RunReport,
) -> Result<KgWriter<W>, EngineError> {
    let limits = NaiveLimits {
        deadline: options.deadline,
        max_materialized: options.max_materialized,
    };
    let mut graph: IndexMap<String, Vec<String>> = IndexMap::new();
    for map in &dis.mappings {
        let plans = match plans_for(dis, map, Mode::Naive) {
            Ok(p) => p,
            Err(e) => {
                fail_map(report, &map.id, e);
                continue;
            }
        };
        for plan in &plans {
            let mut c = CostCounters::default();
            let result = open_source(&map.logical_source)
                .map_err(|e| EngineError::source(&map.id, e))
                .and_then(|records| naive_execute(plan, records, &mut c, &limits));
            match result {
                Ok(out) => {
                    let join = (plan.kind == OperatorKind::ObjectJoin).then_some(JoinCardinality {
                        n_parent: out.n_parent,
                        n_child: out.n_child,
                    });
                    report.operators.push(operator_report(plan, c, join, false));
                    let entry = graph.entry(plan.pom.predicate.clone()).or_default();
                    *entry = union_sorted(std::mem::take(entry), out.lines);
                }
                Err(e) if fatal(&e) => return Err(e),
                Err(e) => {
                    fail_map(report, &map.id, e);
                    break;
                }
            }
        }
        if let Some(d) = options.deadline {
            if Instant::now() >= d {
                return Err(EngineError::Timeout(started.elapsed()));
            }
        }
    }
    let mut writer = KgWriter::new(sink);
    for (predicate, lines) in &graph {
        writer.write_lines(lines.iter().map(String::as_str))?;
        report.predicates.entry(predicate.clone()).or_default().emitted = lines.len() as u64;
    }
    Ok(writer)
}

impl RunReport {
    pub fn wall_time(&self) -> Duration {
        Duration::from_secs_f64(self.wall_time_secs)
    }
}
