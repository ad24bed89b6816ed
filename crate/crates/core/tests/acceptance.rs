//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the summary reads top to bottom. Criterion 9
//! needs the external dataset and only runs when `TRACELOC_SEOSS_DIR` is set.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use common::{fixture_config, prefix_metrics, RawFixture, DAY};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use traceloc::bugcache::{audit_leakage, decay_term, find_fix_commits, is_fix_message, HistoryCutoff};
use traceloc::composer::{fixed_coefficients, FeatureRow, FusionKind, FusionSpec, RankedList};
use traceloc::corpus::{
    bug_id_set, link_issues_commits, CommitLog, CommitRecord, FileChange, IssueCorpus, IssueKind, IssueReport,
    SourceFilter,
};
use traceloc::eval::{evaluate_bug, evaluate_rankings, ks_test, paired_ttest, KsMethod, METRICS};
use traceloc::pipeline::{ingest, run_pipeline, score_history, score_trace, RunConfig};
use traceloc::tracescore::{select_artifacts, CutoffMode, SizeLimits};

type Check = fn() -> Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn c1_fixed_weight_algebra() -> Result<(), String> {
    let (r, s, h) = fixed_coefficients(0.2, 0.3);
    let tol = 4.0 * f64::EPSILON;
    ensure!((r - 0.14).abs() <= tol, "trace coefficient {r}");
    ensure!((s - 0.56).abs() <= tol, "structure coefficient {s}");
    ensure!((h - 0.30).abs() <= tol, "history coefficient {h}");
    ensure!((r + s + h - 1.0).abs() <= tol, "coefficients sum to {}", r + s + h);
    // the composer itself applies exactly these weights to unit probes
    let probe = |path: &str, rv: f64, hv: f64, sv: f64| FeatureRow {
        bug_id: "B".into(),
        file_path: path.into(),
        susp_r: rv,
        susp_h: hv,
        susp_s: sv,
        label: false,
    };
    let rows = vec![probe("r", 1.0, 0.0, 0.0), probe("h", 0.0, 1.0, 0.0), probe("s", 0.0, 0.0, 1.0), probe("z", 0.0, 0.0, 0.0)];
    let list = FusionSpec::new(FusionKind::FixedWeight).fuse("B", &rows).unwrap();
    let score = |p: &str| list.candidates.iter().find(|c| c.0 == p).unwrap().1;
    ensure!((score("r") - r).abs() <= tol && (score("h") - h).abs() <= tol && (score("s") - s).abs() <= tol, "fused {:?}", list.candidates);
    Ok(())
}

fn c2_decay_boundaries() -> Result<(), String> {
    ensure!(decay_term(0.0, 15.0) == 0.5, "term(0) = {}", decay_term(0.0, 15.0));
    let direct = 1.0 / (1.0 + 12f64.exp());
    let at_k = decay_term(15.0, 15.0);
    ensure!((at_k - direct).abs() <= 1e-12, "term(15) = {at_k}, direct {direct}");
    let grid: Vec<f64> = (0..1000).map(|i| decay_term(15.0 * i as f64 / 999.0, 15.0)).collect();
    ensure!(grid.windows(2).all(|w| w[1] < w[0]), "not strictly decreasing on the grid");
    Ok(())
}

fn c3_trace_oracle() -> Result<(), String> {
    let raw = RawFixture::load();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut nonempty = 0;
    for mode in [CutoffMode::Relaxed, CutoffMode::Strict] {
        let mut cfg = fixture_config(dir.path());
        cfg.cutoff = mode;
        let ds = ingest(&cfg).map_err(|e| e.to_string())?;
        ensure!(ds.queries.len() == raw.queries().len(), "query count {} vs {}", ds.queries.len(), raw.queries().len());
        for table in score_trace(&cfg, &ds) {
            let want = raw.trace_scores(raw.issue(&table.bug_id), mode == CutoffMode::Strict);
            ensure!(table.scores == want, "{} {mode:?}: {:?} vs oracle {:?}", table.bug_id, table.scores, want);
            nonempty += usize::from(!table.is_empty());
        }
    }
    ensure!(nonempty >= 16, "only {nonempty} non-empty tables");
    Ok(())
}

fn random_corpus(rng: &mut ChaCha8Rng) -> (IssueCorpus, CommitLog) {
    let n = rng.gen_range(3..25);
    let mut issues = Vec::new();
    let mut commits = Vec::new();
    for i in 0..n {
        let created = rng.gen_range(0..400) * DAY;
        let kind = if rng.gen_bool(0.7) { IssueKind::Bug } else { IssueKind::Feature };
        let mut issue = IssueReport::new(format!("R-{i}"), kind, created).with_text("cache parser", "");
        if rng.gen_bool(0.85) {
            issue = issue.with_resolved(created + rng.gen_range(0..60) * DAY);
        }
        issues.push(issue);
        for c in 0..rng.gen_range(0..3) {
            let files: Vec<FileChange> =
                (0..rng.gen_range(1..14)).map(|f| FileChange::modified(format!("F{}.java", (f * 7 + c) % 25))).collect();
            commits.push(CommitRecord::new(format!("h{i}-{c}"), created + c * DAY, format!("R-{i} fix")).with_changes(files));
        }
    }
    commits.push(CommitRecord::new("root", -DAY, "init").with_changes(vec![FileChange::added("F0.java")]));
    (IssueCorpus::from_issues(issues).unwrap(), CommitLog::new(commits, SourceFilter::new([".java"])).unwrap())
}

fn c4_cutoff_semantics() -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = fixture_config(dir.path());
    let ds = ingest(&cfg).map_err(|e| e.to_string())?;
    let mut demonstrated = Vec::new();
    for q in &ds.queries {
        let query = ds.corpus.get(&q.id).unwrap();
        let pick = |mode| select_artifacts(query, &ds.corpus, &ds.index, &ds.log, mode, SizeLimits::default());
        let (relaxed, strict) = (pick(CutoffMode::Relaxed), pick(CutoffMode::Strict));
        ensure!(strict.is_subset(&relaxed), "{}: strict {strict:?} not within relaxed {relaxed:?}", q.id);
        for a in relaxed.difference(&strict) {
            let resolved = ds.corpus.get(a).unwrap().resolved.unwrap();
            ensure!(resolved >= query.created, "{}: {a} dropped although resolved before creation", q.id);
            demonstrated.push(format!("{}<-{a}", q.id));
        }
    }
    ensure!(demonstrated.iter().any(|d| d == "DEMO-19<-DEMO-18"), "no strict exclusion shown: {demonstrated:?}");
    // the same law on random corpora
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let (corpus, log) = random_corpus(&mut rng);
        let index = link_issues_commits(&corpus, &log, &[]);
        for q in corpus.bugs() {
            let pick = |mode| select_artifacts(q, &corpus, &index, &log, mode, SizeLimits::default());
            let (relaxed, strict) = (pick(CutoffMode::Relaxed), pick(CutoffMode::Strict));
            ensure!(strict.is_subset(&relaxed), "random corpus: {} strict not within relaxed", q.id);
            ensure!(
                strict.iter().all(|a| corpus.get(a).unwrap().resolved.unwrap() < q.created),
                "random corpus: strict kept a later artifact"
            );
        }
    }
    Ok(())
}

fn c5_leakage_guard() -> Result<(), String> {
    let raw = RawFixture::load();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = fixture_config(dir.path());
    ensure!(cfg.bugcache.cutoff == HistoryCutoff::Created, "fixture must default to the creation cut-off");
    let ds = ingest(&cfg).map_err(|e| e.to_string())?;
    let (tables, audit) = score_history(&cfg, &ds).map_err(|e| e.to_string())?;
    ensure!(audit.violations == 0 && audit.commits_checked > 0, "audit {audit:?}");
    // exhaustive: every fix commit feeding a query, recomputed from the raw log
    let bug_ids = bug_id_set(&ds.corpus);
    let mut audited = 0;
    for (q, table) in ds.queries.iter().zip(&tables) {
        let query = ds.corpus.get(&q.id).unwrap();
        let used = find_fix_commits(&ds.log, &bug_ids, query, &cfg.bugcache);
        audit_leakage(query, &used).map_err(|e| e.to_string())?;
        let mut want: BTreeMap<String, f64> = BTreeMap::new();
        for c in raw.commits.iter().filter(|c| c.ts >= q.created - 15 * DAY && c.ts < q.created) {
            if !is_fix_message(&c.message, &bug_ids) {
                continue;
            }
            audited += 1;
            ensure!(c.ts < q.created, "{} uses {} at {}", q.id, c.hash, c.ts);
            let term = decay_term((q.created - c.ts) as f64 / DAY as f64, 15.0);
            let files: BTreeSet<String> =
                c.changes.iter().filter_map(|ch| ch.new.clone().or(ch.old.clone())).filter(|p| q.snapshot.contains(p)).collect();
            for f in files {
                *want.entry(f).or_default() += term;
            }
        }
        ensure!(table.scores.len() == want.len(), "{}: files {:?} vs {:?}", q.id, table.scores.keys(), want.keys());
        for (f, w) in &want {
            ensure!((table.get(f) - w).abs() < 1e-12, "{} {f}: {} vs {w}", q.id, table.get(f));
        }
    }
    ensure!(audited > 0, "no history commits audited");
    // crafted leak: fix commit between creation and resolution of DEMO-12
    let mut leaky = cfg.clone();
    leaky.set("bugcache.cutoff", "resolved").map_err(|e| e.to_string())?;
    ensure!(score_history(&leaky, &ds).is_err(), "resolved cut-off accepted without opt-in");
    leaky.bugcache.allow_leakage = true;
    let (leaked, _) = score_history(&leaky, &ds).map_err(|e| e.to_string())?;
    let pos = ds.queries.iter().position(|q| q.id == "DEMO-12").ok_or("DEMO-12 is not a query")?;
    let file = "demo/session/SessionStore.java";
    ensure!(ds.queries[pos].truth.contains(file), "{file} not buggy for DEMO-12");
    let (before, after) = (tables[pos].get(file), leaked[pos].get(file));
    ensure!(after > before, "Susp^H of {file}: {before} -> {after}");
    Ok(())
}

fn c6_metric_oracles() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut rankings = Vec::new();
    let mut truth = BTreeMap::new();
    for i in 0..200 {
        let m = rng.gen_range(1..50);
        let mut files: Vec<String> = (0..m).map(|j| format!("F{j}.java")).collect();
        files.shuffle(&mut rng);
        let mut t: BTreeSet<String> = files.iter().filter(|_| rng.gen_bool(0.1)).cloned().collect();
        if t.is_empty() {
            t.insert(if rng.gen_bool(0.5) { files[0].clone() } else { "Gone.java".into() });
        }
        let list = RankedList::from_scores(format!("B{i}"), files.iter().enumerate().map(|(r, f)| (f.clone(), -(r as f64))).collect());
        let oracle = prefix_metrics(&files, &t);
        let got = evaluate_bug(&list, &t).map_err(|e| e.to_string())?;
        ensure!(got.average_precision == oracle.ap, "AP {} vs {}", got.average_precision, oracle.ap);
        ensure!(got.first_rank == oracle.first, "first rank {:?} vs {:?}", got.first_rank, oracle.first);
        truth.insert(list.bug_id.clone(), t);
        rankings.push((list, oracle));
    }
    let lists: Vec<RankedList> = rankings.iter().map(|(l, _)| l.clone()).collect();
    let report = evaluate_rankings("p", "c", &lists, &truth).map_err(|e| e.to_string())?;
    let n = rankings.len() as f64;
    let map = rankings.iter().map(|(_, o)| o.ap).sum::<f64>() / n;
    let rr: Vec<f64> = rankings.iter().filter_map(|(_, o)| o.first.map(|f| 1.0 / f as f64)).collect();
    ensure!(report.metric("MAP") == map, "MAP");
    ensure!(report.metric("MRR") == rr.iter().sum::<f64>() / rr.len() as f64, "MRR");
    for (i, name) in ["Top1", "Top5", "Top10"].into_iter().enumerate() {
        let want = rankings.iter().filter(|(_, o)| o.top[i]).count() as f64 / n;
        ensure!(report.metric(name) == want, "{name}: {} vs {want}", report.metric(name));
    }
    ensure!(report.metric("Top1") <= report.metric("Top5") && report.metric("Top5") <= report.metric("Top10"), "Top-k not monotone");
    Ok(())
}

fn sha_of(path: &Path) -> Result<String, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

fn c7_composer_properties() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let row = |i: usize, r: f64, h: f64, s: f64| FeatureRow {
        bug_id: "B".into(),
        file_path: format!("F{i:02}.java"),
        susp_r: r,
        susp_h: h,
        susp_s: s,
        label: false,
    };
    let order = |l: &RankedList| l.paths().map(str::to_string).collect::<Vec<_>>();
    for trial in 0..100 {
        let rows: Vec<FeatureRow> = (0..rng.gen_range(1..30))
            .map(|i| row(i, rng.gen_range(0..5) as f64 / 4.0, rng.gen_range(0..5) as f64, rng.gen::<f64>()))
            .collect();
        let (a, b) = (rng.gen_range(0.5..3.0), rng.gen_range(-2.0..2.0));
        let moved: Vec<FeatureRow> =
            rows.iter().map(|r| FeatureRow { susp_r: a * r.susp_r + b, susp_h: r.susp_h.powi(3), susp_s: r.susp_s.exp(), ..r.clone() }).collect();
        let borda = FusionSpec::new(FusionKind::Borda);
        ensure!(
            order(&borda.fuse("B", &rows).unwrap()) == order(&borda.fuse("B", &moved).unwrap()),
            "Borda changed under a monotone transform in trial {trial}"
        );
        let same: Vec<FeatureRow> = rows.iter().map(|r| row(0, r.susp_r, r.susp_r, r.susp_r)).enumerate().map(|(i, r)| FeatureRow { file_path: format!("F{i:02}.java"), ..r }).collect();
        let corrb = FusionSpec::new(FusionKind::CorrB).fuse("B", &same).unwrap();
        let sum = FusionSpec::new(FusionKind::CombSum).fuse("B", &same).unwrap();
        ensure!(order(&corrb) == order(&sum), "CorrB differs from CombSUM in trial {trial}");
    }
    // all ten composers on the fixture, twice with the same seed
    let (d1, d2) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
    let run = |dir: &Path| -> Result<RunConfig, String> {
        let cfg = fixture_config(dir);
        run_pipeline(&cfg).map_err(|e| e.to_string())?;
        Ok(cfg)
    };
    let cfg = run(d1.path())?;
    run(d2.path())?;
    let ds = ingest(&cfg).map_err(|e| e.to_string())?;
    ensure!(cfg.composers.len() == FusionKind::ALL.len(), "fixture config runs {} composers", cfg.composers.len());
    for kind in &cfg.composers {
        let name = format!("rankings_{}.csv", kind.as_str());
        let file = std::fs::File::open(d1.path().join(&name)).map_err(|e| e.to_string())?;
        let lists = traceloc::composer::read_rankings(file).map_err(|e| e.to_string())?;
        ensure!(!lists.is_empty(), "{name} is empty");
        for l in &lists {
            let q = ds.queries.iter().find(|q| q.id == l.bug_id).ok_or(format!("unknown bug {}", l.bug_id))?;
            let got: BTreeSet<&str> = l.paths().collect();
            let want: BTreeSet<&str> = q.snapshot.files.iter().map(String::as_str).collect();
            ensure!(got == want && l.len() == q.snapshot.len(), "{name}: {} is not a permutation", l.bug_id);
        }
        ensure!(sha_of(&d1.path().join(&name))? == sha_of(&d2.path().join(&name))?, "{name} differs between runs");
    }
    Ok(())
}

fn c8_statistics() -> Result<(), String> {
    let t = paired_ttest(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]).map_err(|e| e.to_string())?;
    // reference: with 2 degrees of freedom the two-sided p is 1 - t / sqrt(2 + t²)
    let t_ref = 2.0 / (1.0 / 3f64.sqrt());
    let p_ref = 1.0 - t_ref / (2.0 + t_ref * t_ref).sqrt();
    ensure!((t.t - 3.464).abs() <= 0.001 && (t.t - t_ref).abs() < 1e-12, "t = {}", t.t);
    ensure!((t.p - 0.0742).abs() <= 0.001 && (t.p - p_ref).abs() < 1e-9, "p = {} (reference {p_ref})", t.p);
    let sample = [0.31, 0.12, 0.45, 0.2, 0.28];
    for method in [KsMethod::Auto, KsMethod::Exact, KsMethod::Asymptotic] {
        let ks = ks_test(&sample, &sample, method).map_err(|e| e.to_string())?;
        ensure!(ks.d == 0.0 && ks.p == 1.0, "{method:?}: D = {}, p = {}", ks.d, ks.p);
    }
    Ok(())
}

/// Paper averages: trace-only relaxed, then the default fixed-weight composer.
const TRACE_ONLY: [(&str, f64); 5] = [("MAP", 0.145), ("MRR", 0.242), ("Top1", 0.156), ("Top5", 0.335), ("Top10", 0.419)];
const FIXED_WEIGHT: [(&str, f64); 2] = [("MAP", 0.298), ("MRR", 0.433)];

fn c9_replication(root: &Path) -> Result<(), String> {
    let mut confs: Vec<_> = std::fs::read_dir(root)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "conf"))
        .collect();
    confs.sort();
    ensure!(!confs.is_empty(), "no *.conf files in {}", root.display());
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut averages: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    for conf in &confs {
        for (label, a, b) in [("trace", "1", "0"), ("fixed", "0.2", "0.3")] {
            let mut cfg = RunConfig::load(conf).map_err(|e| e.to_string())?;
            for (k, v) in [("cutoff", "relaxed"), ("composers", "fixed_weight"), ("fixed.a", a), ("fixed.b", b)] {
                cfg.set(k, v).map_err(|e| e.to_string())?;
            }
            cfg.workdir = out.path().join(format!("{}_{label}", cfg.project));
            let summary = run_pipeline(&cfg).map_err(|e| e.to_string())?;
            let report = &summary.bundle.reports[0];
            for m in METRICS {
                *averages.entry((label, m)).or_default() += report.metric(m) / confs.len() as f64;
            }
        }
    }
    let mut misses = Vec::new();
    for (label, table) in [("trace", &TRACE_ONLY[..]), ("fixed", &FIXED_WEIGHT[..])] {
        for (m, want) in table {
            let got = averages[&(label, *m)];
            println!("    {label:<5} {m:<5} got {got:.3} paper {want:.3}");
            if (got - want).abs() > 0.03 {
                misses.push(format!("{label} {m}"));
            }
        }
    }
    ensure!(misses.is_empty(), "outside ±0.03: {}", misses.join(", "));
    Ok(())
}

fn main() {
    let checks: [(u8, &str, Check, Duration); 8] = [
        (1, "fixed-weight algebra", c1_fixed_weight_algebra, Duration::from_secs(1)),
        (2, "decay term boundary values", c2_decay_boundaries, Duration::from_secs(1)),
        (3, "trace score oracle equivalence", c3_trace_oracle, Duration::from_secs(5)),
        (4, "cut-off semantics", c4_cutoff_semantics, Duration::from_secs(5)),
        (5, "leakage guard", c5_leakage_guard, Duration::from_secs(5)),
        (6, "metric oracles", c6_metric_oracles, Duration::from_secs(5)),
        (7, "composer properties", c7_composer_properties, Duration::from_secs(30)),
        (8, "statistics parity", c8_statistics, Duration::from_secs(1)),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, check, budget) in checks {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|()| {
            if elapsed > budget {
                Err(format!("took {elapsed:.2?}, budget {budget:?}"))
            } else {
                Ok(())
            }
        });
        match outcome {
            Ok(()) => println!("criterion {id} {name}: PASS ({elapsed:.2?})"),
            Err(e) => {
                failed += 1;
                println!("criterion {id} {name}: FAIL ({elapsed:.2?}) {e}");
            }
        }
    }
    match std::env::var_os("TRACELOC_SEOSS_DIR") {
        None => println!("criterion 9 full-dataset replication: NOT RUN (external dataset; set TRACELOC_SEOSS_DIR)"),
        Some(dir) => {
            let start = Instant::now();
            match c9_replication(Path::new(&dir)) {
                Ok(()) => println!("criterion 9 full-dataset replication: PASS ({:.0?})", start.elapsed()),
                Err(e) => {
                    failed += 1;
                    println!("criterion 9 full-dataset replication: FAIL {e}");
                }
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
