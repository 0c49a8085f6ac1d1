mod common;

use std::fs;
use std::path::{Path, PathBuf};

use sensedict::cli::{run, ExitStatus};
use sensedict::replacement::ReplacementReport;
use sensedict::store::{write_file, write_stream, OccurrenceRecord, RecordCount, StreamHeader};
use sensedict::synthetic::{CorpusSpec, SyntheticCorpus};
use sensedict::{dictionary, distill, store, Dtype};
use tempfile::TempDir;

fn exec(args: &[&str]) -> ExitStatus {
    run(std::iter::once("sensedict").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn corpus(&self, name: &str, spec: &CorpusSpec) -> (PathBuf, SyntheticCorpus) {
        let corpus = SyntheticCorpus::generate(spec);
        let path = self.path(name);
        write_file(&path, Dtype::F32, corpus.dim, &corpus.records).unwrap();
        (path, corpus)
    }
}

fn small() -> CorpusSpec {
    CorpusSpec {
        tokens: 8,
        occurrences_per_token: 60,
        ..Default::default()
    }
}

#[test]
fn build_is_reproducible_byte_for_byte() {
    let ws = Workspace::new();
    let (input, _) = ws.corpus("c.semb", &small());
    let a = ws.path("a.sdict");
    let b = ws.path("b.sdict");
    assert_eq!(
        exec(&[
            "build",
            "--input",
            s(&input),
            "--out",
            s(&a),
            "--k",
            "3",
            "--threads",
            "1"
        ]),
        ExitStatus::Success
    );
    assert_eq!(
        exec(&[
            "build",
            "--input",
            s(&input),
            "--out",
            s(&b),
            "--k",
            "3",
            "--threads",
            "8"
        ]),
        ExitStatus::Success
    );
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn adaptive_build_sets_flag() {
    let ws = Workspace::new();
    let (input, _) = ws.corpus("c.semb", &small());
    let out = ws.path("d.sdict");
    assert_eq!(
        exec(&[
            "build",
            "--input",
            s(&input),
            "--out",
            s(&out),
            "--adaptive"
        ]),
        ExitStatus::Success
    );
    let dict = dictionary::read_file(&out).unwrap();
    assert_eq!(
        dict.flags & dictionary::FLAG_ADAPTIVE,
        dictionary::FLAG_ADAPTIVE
    );
    assert_eq!(dict.len(), 8);
}

#[test]
fn replace_writes_stream_and_parseable_report() {
    let ws = Workspace::new();
    let (input, corpus) = ws.corpus("c.semb", &small());
    let dict = ws.path("d.sdict");
    let out = ws.path("r.semb");
    let report = ws.path("r.json");
    assert_eq!(
        exec(&["build", "--input", s(&input), "--out", s(&dict), "--k", "3"]),
        ExitStatus::Success
    );
    assert_eq!(
        exec(&[
            "replace",
            "--dict",
            s(&dict),
            "--input",
            s(&input),
            "--out",
            s(&out),
            "--report",
            s(&report)
        ]),
        ExitStatus::Success
    );
    let r: ReplacementReport = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    assert_eq!(r.records, corpus.records.len() as u64);
    assert_eq!(r.replaced, r.records);
    let (_, back) = store::read_file(&out).unwrap();
    assert_eq!(back.len(), corpus.records.len());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(
        exec(&["build", "--input", "x", "--out", "y", "--k", "0"]),
        ExitStatus::Usage
    );
    assert_eq!(
        exec(&[
            "build",
            "--input",
            "x",
            "--out",
            "y",
            "--k",
            "3",
            "--adaptive"
        ]),
        ExitStatus::Usage
    );
    assert_eq!(exec(&["frobnicate"]), ExitStatus::Usage);
    assert_eq!(exec(&[]), ExitStatus::Usage);
    assert_eq!(
        exec(&[
            "distill",
            "--dict",
            "a",
            "--teacher",
            "b",
            "--features",
            "c",
            "--out",
            "d",
            "--batch",
            "0"
        ]),
        ExitStatus::Usage
    );
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(exec(&["--help"]), ExitStatus::Success);
    assert_eq!(exec(&["build", "--help"]), ExitStatus::Success);
    assert_eq!(exec(&["--version"]), ExitStatus::Success);
    assert_eq!(ExitStatus::InputFormat.code(), 2);
    assert_eq!(ExitStatus::Contract.code(), 3);
}

#[test]
fn bad_input_exits_two_without_partial_output() {
    let ws = Workspace::new();
    let garbage = ws.path("bad.semb");
    fs::write(&garbage, b"NOPE this is not a stream").unwrap();
    let out = ws.path("out.sdict");
    assert_eq!(
        exec(&[
            "build",
            "--input",
            s(&garbage),
            "--out",
            s(&out),
            "--k",
            "2"
        ]),
        ExitStatus::InputFormat
    );
    assert!(!out.exists());
    assert_eq!(
        exec(&["validate", "--input", s(&garbage)]),
        ExitStatus::InputFormat
    );
    assert_eq!(
        exec(&["stats", "--dict", s(&garbage)]),
        ExitStatus::InputFormat
    );
    assert_eq!(
        exec(&["validate", "--input", s(&ws.path("missing.semb"))]),
        ExitStatus::InputFormat
    );

    // A truncated record midway must not leave a replaced stream behind.
    let (input, _) = ws.corpus("c.semb", &small());
    let dict = ws.path("d.sdict");
    assert_eq!(
        exec(&["build", "--input", s(&input), "--out", s(&dict), "--k", "3"]),
        ExitStatus::Success
    );
    let mut bytes = fs::read(&input).unwrap();
    bytes.truncate(bytes.len() - 3);
    let truncated = ws.path("t.semb");
    fs::write(&truncated, bytes).unwrap();
    let out = ws.path("r.semb");
    let report = ws.path("r.json");
    assert_eq!(
        exec(&[
            "replace",
            "--dict",
            s(&dict),
            "--input",
            s(&truncated),
            "--out",
            s(&out),
            "--report",
            s(&report)
        ]),
        ExitStatus::InputFormat
    );
    assert!(!out.exists() && !report.exists());
}

#[test]
fn contract_violation_exits_three() {
    let ws = Workspace::new();
    let (input, _) = ws.corpus("c.semb", &small());
    let dict = ws.path("d.sdict");
    assert_eq!(
        exec(&["build", "--input", s(&input), "--out", s(&dict), "--k", "3"]),
        ExitStatus::Success
    );
    let wide = ws.path("wide.semb");
    write_file(
        &wide,
        Dtype::F32,
        5,
        &[OccurrenceRecord::new(0, vec![0.0; 5])],
    )
    .unwrap();
    let out = ws.path("r.semb");
    assert_eq!(
        exec(&[
            "replace",
            "--dict",
            s(&dict),
            "--input",
            s(&wide),
            "--out",
            s(&out),
            "--report",
            s(&ws.path("r.json"))
        ]),
        ExitStatus::Contract
    );
    assert!(!out.exists());
}

#[test]
fn full_pipeline_end_to_end() {
    let ws = Workspace::new();
    let task = common::distill_task(&small(), 0.01, 5);
    let teacher = ws.path("teacher.semb");
    let features = ws.path("features.semb");
    let header = StreamHeader::new(Dtype::F32, 16, RecordCount::Unknown);
    write_stream(&task.teacher, header, fs::File::create(&teacher).unwrap()).unwrap();
    write_stream(&task.features, header, fs::File::create(&features).unwrap()).unwrap();

    let dict = ws.path("d.sdict");
    assert_eq!(
        exec(&["validate", "--input", s(&teacher)]),
        ExitStatus::Success
    );
    assert_eq!(
        exec(&[
            "build",
            "--input",
            s(&teacher),
            "--out",
            s(&dict),
            "--k",
            "3",
            "--dtype",
            "f16"
        ]),
        ExitStatus::Success
    );
    assert_eq!(exec(&["stats", "--dict", s(&dict)]), ExitStatus::Success);
    assert_eq!(
        exec(&["stats", "--dict", s(&dict), "--json"]),
        ExitStatus::Success
    );

    let model = ws.path("m.skdm");
    assert_eq!(
        exec(&[
            "distill",
            "--dict",
            s(&dict),
            "--teacher",
            s(&teacher),
            "--features",
            s(&features),
            "--out",
            s(&model),
            "--epochs",
            "5",
            "--lr",
            "0.01",
            "--hidden",
            "0",
        ]),
        ExitStatus::Success
    );
    let m = distill::read_file(&model).unwrap();
    assert_eq!((m.feature_dim, m.hidden_dim, m.teacher_dim), (16, 0, 16));

    let inferred = ws.path("i.semb");
    let labels = ws.path("i.tsv");
    assert_eq!(
        exec(&[
            "infer",
            "--dict",
            s(&dict),
            "--model",
            s(&model),
            "--features",
            s(&features),
            "--out",
            s(&inferred),
            "--labels",
            s(&labels),
        ]),
        ExitStatus::Success
    );
    let (h, recs) = store::read_file(&inferred).unwrap();
    assert_eq!(h.dim(), 16);
    assert_eq!(recs.len(), task.features.len());
    assert_eq!(
        fs::read_to_string(&labels).unwrap().lines().count(),
        recs.len()
    );

    let vocab = ws.path("v.tsv");
    fs::write(&vocab, "0\talpha\n1\tbeta\n2\tgamma\n3\tdelta\n").unwrap();
    let words = ws.path("w.sdict");
    assert_eq!(
        exec(&[
            "word-build",
            "--input",
            s(&teacher),
            "--out",
            s(&words),
            "--k",
            "2"
        ]),
        ExitStatus::Success
    );
    let pairs = ws.path("p.tsv");
    fs::write(
        &pairs,
        "alpha\tbeta\t3.0\nalpha\tgamma\t1.0\nbeta\tdelta\t2.0\nalpha\tomega\t4.0\n",
    )
    .unwrap();
    let report = ws.path("ws.json");
    assert_eq!(
        exec(&[
            "wordsim",
            "--dict",
            s(&words),
            "--vocab",
            s(&vocab),
            "--pairs",
            s(&pairs),
            "--report",
            s(&report)
        ]),
        ExitStatus::Success
    );
    let v: serde_json::Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    assert_eq!(v["pairs_scored"], 3);
    assert_eq!(v["pairs_missing"], 1);
}
