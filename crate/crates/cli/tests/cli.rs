use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("epistemod-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn epistemod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epistemod"))
        .args(args)
        .env_remove("EPISTEMOD_BUDGET")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn prove_exit_codes() {
    assert_eq!(epistemod(&["prove", "K1 p -> p"]).status.code(), Some(0));
    let o = epistemod(&["prove", "p -> K1 p"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("countermodel at"));
    assert_eq!(epistemod(&["prove", "(p"]).status.code(), Some(64));
    assert_eq!(epistemod(&["prove"]).status.code(), Some(64));
    assert_eq!(
        epistemod(&["--format", "xml", "prove", "p"]).status.code(),
        Some(64)
    );
}

#[test]
fn budget_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_epistemod"))
        .args(["prove", "K1 (p | q) -> K1 p | ~K2 q"])
        .env("EPISTEMOD_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_epistemod"))
        .args(["prove", "p"])
        .env("EPISTEMOD_BUDGET", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn derive_and_necessitation() {
    let gamma = scratch("k1m.gamma", "# hypotheses\nK1 m\n");
    let g = gamma.to_str().unwrap();
    assert_eq!(
        epistemod(&["derive", "--gamma", g, "m"]).status.code(),
        Some(0)
    );
    let o = epistemod(&["derive", "--gamma", g, "K2 m"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(
        epistemod(&["nec-closed", "--gamma", g, "--agents", "2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        epistemod(&["nec-closed", "--gamma", g]).status.code(),
        Some(0)
    );
    assert_eq!(
        epistemod(&["derive", "--gamma", "/nonexistent/gamma", "m"])
            .status
            .code(),
        Some(64)
    );
}

#[test]
fn normal_form_reports_equivalence() {
    let o = epistemod(&["nform", "K1 (p | K1 q)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("equivalence: valid"));
    assert_eq!(epistemod(&["nform", "K2 p"]).status.code(), Some(64));
    let o = epistemod(&["nform", "--basis", "K1 p & p"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn classification_text() {
    let o = epistemod(&["canonical", "--atoms", "p", "--classify"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("15 subsets, 7 fully explanatory"));
    assert_eq!(
        epistemod(&["canonical", "--atoms", "p,q", "--classify"])
            .status
            .code(),
        Some(64)
    );
    let o = epistemod(&[
        "canonical",
        "--atoms",
        "p,q",
        "--classify",
        "--samples",
        "20",
        "--seed",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("20 subsets"));
    assert_eq!(
        epistemod(&["canonical", "--atoms", "p,q,r,s"])
            .status
            .code(),
        Some(64)
    );
}

#[test]
fn canonical_model_of_hypotheses() {
    let gamma = scratch("p.gamma", "p\n");
    let o = epistemod(&[
        "canonical",
        "--atoms",
        "p",
        "--gamma",
        gamma.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("world set: {A,B}"), "{text}");
    assert!(text.contains("witness p at B"), "{text}");
    let outside = scratch("q.gamma", "q\n");
    assert_eq!(
        epistemod(&[
            "canonical",
            "--atoms",
            "p",
            "--gamma",
            outside.to_str().unwrap()
        ])
        .status
        .code(),
        Some(64)
    );
}

#[test]
fn canonical_drawing() {
    let dot = std::env::temp_dir().join(format!("epistemod-cli-{}-fig.dot", std::process::id()));
    let o = epistemod(&["canonical", "--atoms", "p", "--dot", dot.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let drawing = std::fs::read_to_string(&dot).unwrap();
    assert!(drawing.starts_with("graph canonical"));
    assert_eq!(
        stdout(&epistemod(&[
            "--format",
            "dot",
            "canonical",
            "--atoms",
            "p"
        ])),
        drawing
    );
}

#[test]
fn m8_names_witness_q() {
    let m7 = fixture("m7.model");
    let o = epistemod(&[
        "carve",
        "--model",
        m7.to_str().unwrap(),
        "--keep",
        "w,v",
        "--check-fe",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("fully explanatory: no"));
    assert!(text.contains("world w agent 1: Q holds"), "{text}");
    let o = epistemod(&["check-fe", "--model", m7.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = epistemod(&["carve", "--model", m7.to_str().unwrap(), "--keep", "w,zz"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn carving_drawing_has_boundary() {
    let m7 = fixture("m7.model");
    let o = epistemod(&[
        "--format",
        "dot",
        "carve",
        "--model",
        m7.to_str().unwrap(),
        "--keep",
        "w,v",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("subgraph cluster_carved"));
}

#[test]
fn structured_output_is_deterministic() {
    let m9 = fixture("m9.model");
    let runs: Vec<Vec<Vec<u8>>> = (0..2)
        .map(|_| {
            vec![
                epistemod(&[
                    "--format",
                    "structured",
                    "canonical",
                    "--atoms",
                    "p",
                    "--classify",
                ])
                .stdout,
                epistemod(&[
                    "--format",
                    "structured",
                    "carve",
                    "--model",
                    m9.to_str().unwrap(),
                    "--keep",
                    "w,v",
                    "--check-fe",
                ])
                .stdout,
                epistemod(&[
                    "--format",
                    "structured",
                    "prove",
                    "--agents",
                    "2",
                    "K1 p -> K2 p",
                ])
                .stdout,
                epistemod(&["--format", "structured", "corpus"]).stdout,
            ]
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    for out in &runs[0] {
        let v: serde_json::Value = serde_json::from_slice(out).unwrap();
        assert!(v.is_object());
    }
}

#[test]
fn corpus_passes_builtin_and_from_directory() {
    let o = epistemod(&["corpus"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 failed"));
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let o = epistemod(&["corpus", "--dir", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn corpus_reports_failing_expectations() {
    let dir = std::env::temp_dir().join(format!("epistemod-cli-{}-corpus", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::copy(fixture("m5.model"), dir.join("m5.model")).unwrap();
    std::fs::write(
        dir.join("corpus.toml"),
        "[[fixture]]\nname = \"M5\"\nkind = \"model\"\ndocument = \"m5.model\"\n\
         expect = [{ check = \"holds\", state = \"w\", formula = \"K1 p\", value = true }]\n",
    )
    .unwrap();
    let o = epistemod(&["corpus", "--dir", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL M5"));
}

#[test]
fn export_round_trips() {
    let m9 = fixture("m9.model");
    let o = epistemod(&["export", "--model", m9.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc = scratch("m9-again.model", &stdout(&o));
    let again = epistemod(&["export", "--model", doc.to_str().unwrap()]);
    assert_eq!(stdout(&again), stdout(&o));
    let o = epistemod(&["--format", "dot", "export", "--model", m9.to_str().unwrap()]);
    assert!(stdout(&o).contains("\"w\" -- \"v\" [label=\"R1,R2\"];"));
}
