//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use putforge_core::capture::{self, build_union, coverage_gain, CaptureRecord, Context, KindTable};
use putforge_core::cargo::{self, TestStatus};
use putforge_core::config::{Config, Settings};
use putforge_core::fsutil;
use putforge_core::generate::{Generation, PutManifestRow};
use putforge_core::instrument::{self, InstrumentationPlan};
use putforge_core::pipeline::{kind_table, Pipeline};
use putforge_core::runner::report::FinalizedRow;
use putforge_core::runner::{classify, Category, Classification, Outcome};
use putforge_core::scalar::{canonicalize, decode, Scalar, ScalarKind, Tuple};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Value;
use tempfile::TempDir;

const FIXTURES: [&str; 4] = ["radio_form", "codec", "text_bag", "sideeffect"];

type Check = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn ensure(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn within(started: Instant, limit: Duration) -> Result<Duration, String> {
    let took = started.elapsed();
    ensure(took < limit, || format!("took {took:.1?}, limit {limit:?}"))?;
    Ok(took)
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text = fsutil::read(path).map_err(err)?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn pipeline(name: &str, ws: &Path) -> Result<Pipeline, String> {
    let settings = Settings {
        workspace: Some(ws.to_path_buf()),
        ..Settings::default()
    };
    Config::load(&fixture(name), None, settings).map(Pipeline::new).map_err(err)
}

/// Workspaces of every full pipeline run, for the report partition check.
struct Runs {
    workspaces: Vec<(String, TempDir)>,
}

impl Runs {
    fn full_run(&mut self, name: &str) -> Result<PathBuf, String> {
        let ws = tempfile::tempdir().map_err(err)?;
        pipeline(name, ws.path())?.run_all().map_err(|e| format!("{name}: {e}"))?;
        let path = ws.path().to_path_buf();
        self.workspaces.push((name.to_owned(), ws));
        Ok(path)
    }
}

fn alpha_beta() -> Check {
    let started = Instant::now();
    let ws = tempfile::tempdir().map_err(err)?;
    let p = pipeline("text_bag", ws.path())?;
    p.analyze().map_err(err)?;
    p.capture(Context::Test, None).map_err(err)?;
    p.capture(Context::Field, None).map_err(err)?;
    p.generate().map_err(err)?;
    let took = within(started, Duration::from_secs(30))?;

    let cut = "bag::test_bag_management";
    let manifest: Vec<PutManifestRow> = read_json(&p.workspace.puts_json())?;
    let puts = manifest.iter().filter(|r| r.cut == cut).count();
    let generation: Generation = read_json(&p.workspace.generation_json())?;
    let plan = generation.plans.iter().find(|pl| pl.cut == cut).ok_or("no plan for the CUT")?;
    ensure(plan.alpha == 2 && plan.beta == 2, || format!("alpha {} beta {}", plan.alpha, plan.beta))?;
    ensure(puts == 4, || format!("{puts} PUTs generated"))?;
    Ok(format!("{cut}: alpha 2 x beta 2 -> {puts} PUTs in {took:.1?}"))
}

fn radio_form(runs: &mut Runs) -> Check {
    let started = Instant::now();
    let ws = runs.full_run("radio_form")?;
    let took = within(started, Duration::from_secs(60))?;

    let target = "radio_form::RadioButton::select_option(text)";
    let unions = capture::UnionFile::from_json(&fsutil::read(&ws.join("union.json")).map_err(err)?).map_err(err)?.0;
    let union = unions.get(target).ok_or("no union for select_option")?;
    ensure(union.len() == 12, || format!("union has {} rows", union.len()))?;
    let b = Tuple::new(vec![canonicalize(ScalarKind::Text, &Scalar::Text("b".into())).map_err(err)?]);
    let c = Tuple::new(vec![canonicalize(ScalarKind::Text, &Scalar::Text("c".into())).map_err(err)?]);
    ensure(union.originals() == vec![&b], || format!("originals {:?}", union.originals()))?;

    let generation: Generation = read_json(&ws.join("generation.json"))?;
    let classes: BTreeMap<String, Classification> = read_json(&ws.join("classification.json"))?;
    ensure(classes.len() == 2, || format!("{} PUTs classified", classes.len()))?;
    let mut found: BTreeMap<Category, BTreeSet<Tuple>> = BTreeMap::new();
    for (id, class) in &classes {
        let (unit, _) = generation.put(id).ok_or_else(|| format!("unknown PUT {id}"))?;
        let values = class.pass_rows.iter().map(|&r| unit.provider.rows[r].clone()).collect();
        found.insert(class.category, values);
    }
    let expected = BTreeMap::from([
        (Category::FalsifiablyCoupled, BTreeSet::from([b.clone(), c])),
        (Category::StronglyCoupled, BTreeSet::from([b])),
    ]);
    ensure(found == expected, || format!("got {found:?}"))?;
    Ok(format!("12-row union: falsifiably-coupled passes {{b, c}}, strongly-coupled passes {{b}}, in {took:.1?}"))
}

/// Reference classifier: each category is its own set predicate.
fn reference(pass: &BTreeSet<usize>, originals: &BTreeSet<usize>, rows: usize) -> Category {
    let ill = !originals.is_subset(pass);
    let decoupled = !ill && pass.len() == rows;
    let strong = !ill && pass == originals && pass.len() < rows;
    let falsifiable = !ill && pass.len() > originals.len() && pass.len() < rows;
    let hits = [ill, decoupled, strong, falsifiable].iter().filter(|h| **h).count();
    assert_eq!(hits, 1, "reference predicates overlap for pass {pass:?} originals {originals:?} of {rows}");
    match (ill, decoupled, strong) {
        (true, _, _) => Category::IllFormed,
        (_, true, _) => Category::Decoupled,
        (_, _, true) => Category::StronglyCoupled,
        _ => Category::FalsifiablyCoupled,
    }
}

fn classifier_oracle() -> Check {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let instances = 5_000;
    let mut per_category: BTreeMap<Category, usize> = BTreeMap::new();
    for i in 0..instances {
        let rows = rng.gen_range(1..=50);
        let n_orig = rng.gen_range(1..=rows.min(5));
        let mut originals = BTreeSet::new();
        while originals.len() < n_orig {
            originals.insert(rng.gen_range(0..rows));
        }
        // Bias towards passing originals so every category shows up often.
        let keep_originals = rng.gen_bool(0.75);
        let pass_rate: f64 = [0.0, 0.3, 0.7, 1.0][rng.gen_range(0..4)];
        let outcomes: Vec<Option<Outcome>> = (0..rows)
            .map(|r| {
                let pass = if originals.contains(&r) && keep_originals { true } else { rng.gen_bool(pass_rate) };
                Some(if pass {
                    Outcome::Pass
                } else {
                    [Outcome::Fail, Outcome::Error, Outcome::Timeout][rng.gen_range(0..3)]
                })
            })
            .collect();
        let pass: BTreeSet<usize> = (0..rows).filter(|&r| outcomes[r] == Some(Outcome::Pass)).collect();
        let got = classify(&format!("p{i}"), &outcomes, &originals).map_err(err)?;
        let want = reference(&pass, &originals, rows);
        ensure(got.category == want, || {
            format!("instance {i}: pass {pass:?} originals {originals:?} rows {rows}: {:?} vs {want:?}", got.category)
        })?;
        ensure(got.pass_rows == pass, || format!("instance {i}: pass rows differ"))?;
        *per_category.entry(want).or_default() += 1;
    }
    let took = within(started, Duration::from_secs(10))?;
    ensure(per_category.len() == 4, || format!("categories covered: {per_category:?}"))?;
    let counts: Vec<String> = per_category.iter().map(|(c, n)| format!("{} {n}", c.as_str())).collect();
    Ok(format!("{instances} instances agree ({}) in {took:.1?}", counts.join(", ")))
}

const TEXT_POOL: &[char] = &['"', '\\', '\n', '\r', '\t', '\u{0}', '\u{8}', '\u{c}', '\u{1f}', '\u{7f}', '\u{2028}', 'é', '😀', ' '];

fn random_text(rng: &mut StdRng) -> String {
    let len = rng.gen_range(0..16);
    (0..len)
        .map(|_| match rng.gen_range(0..3) {
            0 => rng.gen::<char>(),
            1 => rng.gen_range(' '..='~'),
            _ => TEXT_POOL[rng.gen_range(0..TEXT_POOL.len())],
        })
        .collect()
}

fn random_scalar(kind: ScalarKind, i: usize, rng: &mut StdRng) -> Scalar {
    match kind {
        ScalarKind::Bool => Scalar::Bool(rng.gen()),
        ScalarKind::Int { bits, signed: true } => {
            let max = i128::MAX >> (128 - bits as u32);
            let edges = [0, -1, 1, max, -max - 1];
            Scalar::Signed(edges.get(i).copied().unwrap_or_else(|| rng.gen::<i128>() >> (128 - bits as u32)))
        }
        ScalarKind::Int { bits, signed: false } => {
            let max = u128::MAX >> (128 - bits as u32);
            let edges = [0, 1, max];
            Scalar::Unsigned(edges.get(i).copied().unwrap_or_else(|| rng.gen::<u128>() >> (128 - bits as u32)))
        }
        ScalarKind::F32 => {
            let edges = [0.0f32, -0.0, f32::NAN, f32::INFINITY, f32::NEG_INFINITY, f32::MIN_POSITIVE / 2.0];
            Scalar::F32(edges.get(i).copied().unwrap_or_else(|| f32::from_bits(rng.gen())))
        }
        ScalarKind::F64 => {
            let edges = [0.0f64, -0.0, f64::NAN, f64::INFINITY, f64::NEG_INFINITY, f64::MIN_POSITIVE / 2.0];
            Scalar::F64(edges.get(i).copied().unwrap_or_else(|| f64::from_bits(rng.gen())))
        }
        ScalarKind::Char => Scalar::Char(if rng.gen_bool(0.3) { TEXT_POOL[rng.gen_range(0..TEXT_POOL.len())] } else { rng.gen() }),
        ScalarKind::Text => Scalar::Text(random_text(rng)),
        ScalarKind::NullableText => {
            if i == 0 || rng.gen_bool(0.1) {
                Scalar::Null
            } else {
                Scalar::Text(random_text(rng))
            }
        }
    }
}

fn kind_name(kind: ScalarKind) -> String {
    match kind {
        ScalarKind::Text => "text".into(),
        ScalarKind::NullableText => "opt".into(),
        other => other.to_string(),
    }
}

fn rust_type(kind: ScalarKind) -> String {
    match kind {
        ScalarKind::Text => "&str".into(),
        ScalarKind::NullableText => "Option<&str>".into(),
        other => other.to_string(),
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// One line of the workload input for `value`.
fn payload(value: &Scalar) -> String {
    match value {
        Scalar::Bool(b) => b.to_string(),
        Scalar::Signed(v) => v.to_string(),
        Scalar::Unsigned(v) => v.to_string(),
        Scalar::F32(v) => format!("{:08x}", v.to_bits()),
        Scalar::F64(v) => format!("{:016x}", v.to_bits()),
        Scalar::Char(c) => format!("{:x}", *c as u32),
        Scalar::Text(s) => hex(s.as_bytes()),
        Scalar::Null => "-".into(),
    }
}

const WORKLOAD_HEAD: &str = r#"fn unhex(s: &str) -> String {
    let bytes: Vec<u8> = (0..s.len()).step_by(2).map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap()).collect();
    String::from_utf8(bytes).unwrap()
}

fn main() {
    let input = std::fs::read_to_string("values.txt").unwrap();
    for line in input.lines() {
        let (kind, p) = line.split_once('\t').unwrap();
        match kind {
            "bool" => { scalars::take_bool(p == "true"); }
            "f32" => { scalars::take_f32(f32::from_bits(u32::from_str_radix(p, 16).unwrap())); }
            "f64" => { scalars::take_f64(f64::from_bits(u64::from_str_radix(p, 16).unwrap())); }
            "char" => { scalars::take_char(char::from_u32(u32::from_str_radix(p, 16).unwrap()).unwrap()); }
            "text" => { scalars::take_text(&unhex(p)); }
            "opt" => { if p == "-" { scalars::take_opt(None); } else { scalars::take_opt(Some(&unhex(p))); } }
"#;

/// A project with one target per kind, and a workload replaying `values`.
fn scalar_project(dir: &Path, values: &[(ScalarKind, Vec<Scalar>)]) -> Result<(), String> {
    let mut lib = String::new();
    let mut test = String::from("#[test]\nfn test_each_kind() {\n");
    let mut arms = String::new();
    for (kind, _) in values {
        let name = kind_name(*kind);
        lib.push_str(&format!("pub fn take_{name}(v: {}) -> bool {{ let _ = v; true }}\n", rust_type(*kind)));
        let literal = match kind {
            ScalarKind::Bool => "true".to_owned(),
            ScalarKind::Int { .. } => format!("1{kind}"),
            ScalarKind::F32 | ScalarKind::F64 => format!("1.5{kind}"),
            ScalarKind::Char => "'x'".into(),
            ScalarKind::Text => "\"x\"".into(),
            ScalarKind::NullableText => "None".into(),
        };
        test.push_str(&format!("    assert!(scalars::take_{name}({literal}));\n"));
        if let ScalarKind::Int { .. } = kind {
            arms.push_str(&format!("            \"{name}\" => {{ scalars::take_{name}(p.parse().unwrap()); }}\n"));
        }
    }
    test.push_str("}\n");
    let workload = format!("{WORKLOAD_HEAD}{arms}            _ => unreachable!(),\n        }}\n    }}\n}}\n");
    let mut input = String::new();
    for (kind, vs) in values {
        for v in vs {
            input.push_str(&format!("{}\t{}\n", kind_name(*kind), payload(v)));
        }
    }
    let files = [
        ("Cargo.toml", "[package]\nname = \"scalars\"\nversion = \"0.1.0\"\nedition = \"2021\"\n\n[workspace]\n".to_owned()),
        ("src/lib.rs", lib),
        ("tests/each.rs", test),
        ("examples/workload.rs", workload),
        ("values.txt", input),
    ];
    for (rel, text) in files {
        fsutil::write(&dir.join(rel), text).map_err(err)?;
    }
    Ok(())
}

fn compare(kind: ScalarKind, expected: &[Scalar], records: &[&CaptureRecord], path: &str) -> Result<(), String> {
    ensure(records.len() == expected.len(), || format!("{path} {kind}: {} records for {} values", records.len(), expected.len()))?;
    for (i, (record, want)) in records.iter().zip(expected).enumerate() {
        let got = decode(kind, &record.tuple.values()[0]).map_err(err)?;
        ensure(got.bit_eq(want), || format!("{path} {kind} value {i}: {want:?} came back as {got:?}"))?;
    }
    Ok(())
}

fn scalar_round_trip() -> Check {
    let started = Instant::now();
    let per_kind = 10_000;
    let mut rng = StdRng::seed_from_u64(0x5eed_0004);
    let values: Vec<(ScalarKind, Vec<Scalar>)> = ScalarKind::all()
        .into_iter()
        .map(|k| (k, (0..per_kind).map(|i| random_scalar(k, i, &mut rng)).collect()))
        .collect();
    let target = |k: ScalarKind| format!("scalars::take_{}({k})", kind_name(k));
    let kinds: KindTable = values.iter().map(|(k, _)| (target(*k), vec![*k])).collect();

    // Library path: encode, write a log, load it back, decode.
    let dir = tempfile::tempdir().map_err(err)?;
    let mut log = String::new();
    for (kind, vs) in &values {
        let id = target(*kind);
        for (n, v) in vs.iter().enumerate() {
            let record = CaptureRecord {
                target: id.clone(),
                tuple: Tuple::new(vec![canonicalize(*kind, v).map_err(err)?]),
                context: Context::Field,
                test_id: None,
                seq: n as u64,
            };
            log.push_str(&record.to_line());
            log.push('\n');
        }
    }
    let log_path = dir.path().join("capture.field.jsonl");
    fsutil::write(&log_path, &log).map_err(err)?;
    let loaded = capture::load(&log_path, &kinds).map_err(err)?;
    ensure(loaded.rejected.is_empty(), || format!("rejected lines: {:?}", &loaded.rejected[..1]))?;
    for (kind, vs) in &values {
        let id = target(*kind);
        let records: Vec<&CaptureRecord> = loaded.records.iter().filter(|r| r.target == id).collect();
        compare(*kind, vs, &records, "library")?;
    }

    // Runtime path: the same values pass through instrumented targets.
    let project = dir.path().join("project");
    scalar_project(&project, &values)?;
    let p = Pipeline::new(
        Config::load(
            &project,
            None,
            Settings {
                workspace: Some(dir.path().join("ws")),
                workload_command: Some("cargo run --quiet --example workload".into()),
                ..Settings::default()
            },
        )
        .map_err(err)?,
    );
    let summary = p.capture(Context::Field, None).map_err(err)?;
    ensure(summary.session.success, || format!("workload failed: {:?}", summary.session.warnings))?;
    let model = p.model().map_err(err)?;
    ensure(model.targets.len() == values.len(), || format!("{} targets found", model.targets.len()))?;
    let runtime = capture::load(&summary.session.log, &kind_table(&model)).map_err(err)?;
    ensure(runtime.rejected.is_empty(), || format!("rejected lines: {:?}", &runtime.rejected[..1]))?;
    for (kind, vs) in &values {
        let id = target(*kind);
        let mut records: Vec<&CaptureRecord> = runtime.records.iter().filter(|r| r.target == id).collect();
        records.sort_by_key(|r| r.seq);
        compare(*kind, vs, &records, "runtime")?;
    }

    // Dedup is bitwise: equal NaNs collapse, signed zeros stay apart.
    let f = |v: f64| Tuple::new(vec![canonicalize(ScalarKind::F64, &Scalar::F64(v)).unwrap()]);
    let record = |t: Tuple| CaptureRecord {
        target: "t(f64)".into(),
        tuple: t,
        context: Context::Field,
        test_id: None,
        seq: 0,
    };
    let other_nan = f64::from_bits(f64::NAN.to_bits() | 1);
    let dedup = [f64::NAN, f64::NAN, 0.0, -0.0, other_nan, 0.0].into_iter().map(|v| record(f(v))).collect::<Vec<_>>();
    let union = build_union(&dedup, &BTreeMap::new());
    ensure(union["t(f64)"].len() == 4, || format!("dedup kept {} rows", union["t(f64)"].len()))?;

    let took = within(started, Duration::from_secs(10))?;
    Ok(format!(
        "{per_kind} values for each of {} kinds round-trip bitwise through the library and the instrumented runtime; NaN dedups, -0.0 != +0.0; {took:.1?}",
        values.len()
    ))
}

fn preservation() -> Check {
    let started = Instant::now();
    let mut lines = Vec::new();
    for name in FIXTURES {
        let dir = tempfile::tempdir().map_err(err)?;
        let original = dir.path().join("original");
        fsutil::copy_project(&fixture(name), &original, &[]).map_err(err)?;
        let before = cargo::suite_verdicts(&original, &[]).map_err(err)?;

        let model = putforge_core::analysis::analyze(&original, &Default::default()).map_err(err)?;
        let plan = InstrumentationPlan {
            targets: model.targets.iter().map(|t| t.id.clone()).collect(),
            output_root: dir.path().join("instrumented"),
            max_records_per_target: instrument::DEFAULT_MAX_RECORDS,
            skip: Vec::new(),
        };
        let inst = instrument::instrument(&original, &model, &plan, true).map_err(err)?;
        let sink = dir.path().join("sink.jsonl");
        let after = instrument::instrumented_verdicts(&inst.root, &sink).map_err(err)?;
        let records = fsutil::read(&sink).map_err(err)?.lines().count();

        ensure(!before.is_empty(), || format!("{name}: no tests ran"))?;
        ensure(before == after, || format!("{name}: {before:?} became {after:?}"))?;
        ensure(records > 0, || format!("{name}: instrumentation recorded nothing"))?;
        let ok = before.values().filter(|s| **s == TestStatus::Ok).count();
        lines.push(format!("{name} {ok}/{}", before.len()));
    }
    let took = within(started, Duration::from_secs(120))?;
    Ok(format!("identical verdicts before and after instrumentation ({}) in {took:.1?}", lines.join(", ")))
}

fn finalization(runs: &mut Runs) -> Check {
    let started = Instant::now();
    let mut merged = 0;
    let mut finalized_total = 0;
    for name in ["radio_form", "text_bag", "sideeffect"] {
        let ws = runs.full_run(name)?;
        let classes: BTreeMap<String, Classification> = read_json(&ws.join("classification.json"))?;
        let generation: Generation = read_json(&ws.join("generation.json"))?;
        let finalized: Vec<FinalizedRow> = read_json(&ws.join("finalized.json"))?;
        finalized_total += finalized.len();

        for f in &finalized {
            ensure(f.green(), || format!("{name}: {} passes {}/{}", f.put, f.passed_rows, f.rows))?;
            let first = &classes[&f.merged_from[0]];
            ensure(f.rows == first.pass_rows.len(), || format!("{name}: {} keeps {} rows", f.put, f.rows))?;
            ensure(f.assertions == f.merged_from.len(), || format!("{name}: {} assertion count", f.put))?;
            for m in &f.merged_from {
                ensure(classes[m].pass_rows == first.pass_rows, || format!("{name}: {m} merged with a different pass set"))?;
            }
            if f.merged_from.len() > 1 {
                merged += 1;
            }
        }
        // Every falsifiably-coupled PUT lands in exactly one finalized PUT,
        // and no two finalized PUTs of one unit share a provider.
        let falsifiable: BTreeSet<&String> =
            classes.iter().filter(|(_, c)| c.category == Category::FalsifiablyCoupled).map(|(id, _)| id).collect();
        let covered: Vec<&String> = finalized.iter().flat_map(|f| &f.merged_from).collect();
        ensure(covered.len() == falsifiable.len() && covered.iter().all(|id| falsifiable.contains(id)), || {
            format!("{name}: finalized {covered:?}, falsifiably-coupled {falsifiable:?}")
        })?;
        let mut providers = BTreeSet::new();
        for f in &finalized {
            let (unit, _) = generation.put(&f.merged_from[0]).ok_or("unknown PUT")?;
            ensure(providers.insert((unit.name.clone(), classes[&f.merged_from[0]].pass_rows.clone())), || {
                format!("{name}: unmerged PUTs with identical providers in {}", unit.name)
            })?;
        }

        // Independent re-run of the finalized project with the plain test runner.
        let project = ws.join("build").join("finalized");
        if !finalized.is_empty() {
            let verdicts = cargo::suite_verdicts(&project, &[]).map_err(err)?;
            let failing: Vec<&String> = verdicts.iter().filter(|(_, s)| **s != TestStatus::Ok).map(|(n, _)| n).collect();
            ensure(failing.is_empty(), || format!("{name}: failing after finalization: {failing:?}"))?;
        }
    }
    let took = within(started, Duration::from_secs(60))?;
    ensure(merged > 0, || "no PUTs were merged".into())?;
    Ok(format!("{finalized_total} finalized PUTs all green on re-run, {merged} merged from identical providers, in {took:.1?}"))
}

fn coverage() -> Check {
    let started = Instant::now();
    let gain = coverage_gain(2694, 2);
    let took = within(started, Duration::from_secs(1))?;
    ensure(gain.factor == 1347.0, || format!("factor {}", gain.factor))?;
    ensure(gain.orders_of_magnitude == 3, || format!("orders {}", gain.orders_of_magnitude))?;
    Ok(format!("2694 captured over 2 original -> factor 1347, 3 orders of magnitude, {took:?}"))
}

fn determinism(runs: &mut Runs) -> Check {
    for name in FIXTURES {
        let ws = tempfile::tempdir().map_err(err)?;
        let p = pipeline(name, ws.path())?;
        let files = [p.workspace.union_json(), p.workspace.puts_json(), p.workspace.classification_json()];
        p.run_all().map_err(err)?;
        let first: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).map_err(err)).collect::<Result<_, _>>()?;
        p.run_all().map_err(err)?;
        for (path, before) in files.iter().zip(&first) {
            let after = std::fs::read(path).map_err(err)?;
            ensure(&after == before, || format!("{name}: {} changed between runs", path.display()))?;
        }
        runs.workspaces.push((name.to_owned(), ws));
    }
    Ok(format!("union.json, puts.json and classification.json byte-identical across two runs of each of {} fixtures", FIXTURES.len()))
}

fn partition(runs: &Runs) -> Check {
    let mut seen = BTreeSet::new();
    for (name, ws) in &runs.workspaces {
        let report: Value = read_json(&ws.path().join("report.json"))?;
        let m = &report["module"];
        let n = |k: &str| m[k].as_u64().ok_or_else(|| format!("{name}: report lacks {k}"));
        let (s, f, d) = (n("strongly_coupled")?, n("falsifiably_coupled")?, n("decoupled")?);
        let (executed, ill) = (n("executed")?, n("ill_formed")?);
        ensure(s + f + d == executed - ill, || format!("{name}: {s}+{f}+{d} != {executed}-{ill}"))?;
        seen.insert(name.clone());
    }
    ensure(seen.len() == FIXTURES.len(), || format!("only {seen:?} were run"))?;
    Ok(format!("strongly + falsifiably + decoupled == executed - ill-formed in all {} reports", runs.workspaces.len()))
}

fn main() {
    let mut runs = Runs { workspaces: Vec::new() };
    let mut results: Vec<(u8, &str, Check)> = Vec::new();
    let mut run = |id: u8, title: &'static str, f: &mut dyn FnMut() -> Check| {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        let (mark, text) = match &outcome {
            Ok(t) => ("PASS", t),
            Err(e) => ("FAIL", e),
        };
        println!("criterion {id} [{mark}] {title}: {text}");
        results.push((id, title, outcome));
    };
    run(1, "alpha x beta law", &mut alpha_beta);
    run(2, "radio form re-enactment", &mut || radio_form(&mut runs));
    run(3, "classifier oracle equivalence", &mut classifier_oracle);
    run(4, "scalar encoding round trip", &mut scalar_round_trip);
    run(5, "instrumentation preservation", &mut preservation);
    run(6, "finalization soundness and merging", &mut || finalization(&mut runs));
    run(7, "coverage gain", &mut coverage);
    run(9, "determinism", &mut || determinism(&mut runs));
    run(8, "report partition", &mut || partition(&runs));

    let failed = results.iter().filter(|(_, _, r)| r.is_err()).count();
    println!("\nacceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
