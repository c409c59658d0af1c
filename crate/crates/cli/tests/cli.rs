use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(rel)
}

fn semeval(split: &str, kind: &str) -> PathBuf {
    data(&format!("semeval/{split}/{kind}/2B.music.{split}.{kind}.txt"))
}

fn hyperbox(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperbox"))
        .args(args.iter().map(|a| a.as_ref()))
        .env("RUST_LOG", "warn")
        .output()
        .expect("failed to launch hyperbox")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Quick model on the SemEval-shaped fixture.
fn train_small(dir: &TempDir) -> PathBuf {
    let model = dir.path().join("model.bin");
    let out = hyperbox(&[
        &"train",
        &"--embeddings",
        &data("semeval/embeddings.txt"),
        &"--queries",
        &semeval("training", "data"),
        &"--gold",
        &semeval("training", "gold"),
        &"--candidates",
        &data("semeval/vocabulary/2B.music.vocabulary.txt"),
        &"--dim",
        &"4",
        &"--negatives",
        &"5",
        &"--epochs",
        &"5",
        &"--batch-size",
        &"4",
        &"--out",
        &model,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    model
}

fn predict(dir: &TempDir, model: &Path, topk: &str) -> String {
    let pred = dir.path().join(format!("pred{topk}.txt"));
    let out = hyperbox(&[
        &"predict",
        &"--model",
        &model,
        &"--embeddings",
        &data("semeval/embeddings.txt"),
        &"--queries",
        &semeval("test", "data"),
        &"--candidates",
        &data("semeval/vocabulary/2B.music.vocabulary.txt"),
        &"--topk",
        &topk,
        &"--out",
        &pred,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    std::fs::read_to_string(pred).unwrap()
}

fn evaluate(predictions: &Path, gold: &Path) -> Output {
    hyperbox(&[&"evaluate", &"--predictions", &predictions, &"--gold", &gold])
}

#[test]
fn missing_gold_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = hyperbox(&[
        &"train",
        &"--embeddings",
        &data("semeval/embeddings.txt"),
        &"--queries",
        &semeval("training", "data"),
        &"--candidates",
        &data("semeval/vocabulary/2B.music.vocabulary.txt"),
        &"--out",
        &dir.path().join("m.bin"),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--gold"));
}

#[test]
fn invalid_hyperparameters_fail_before_any_work() {
    let dir = TempDir::new().unwrap();
    let model = dir.path().join("m.bin");
    for arg in ["--lr=-0.1", "--beta1=1.5", "--negatives=0", "--margin=0"] {
        let out = hyperbox(&[
            &"train",
            &"--embeddings",
            &"/nonexistent/embeddings.txt",
            &"--queries",
            &"/nonexistent/q",
            &"--gold",
            &"/nonexistent/g",
            &"--candidates",
            &"/nonexistent/c",
            &"--out",
            &model,
            &arg,
        ]);
        assert_eq!(out.status.code(), Some(1), "{arg}");
        // The config is rejected before the missing embeddings file is touched.
        assert!(!stderr(&out).contains("nonexistent"), "{}", stderr(&out));
        assert!(!model.exists());
    }
}

#[test]
fn failed_training_leaves_no_model() {
    let dir = TempDir::new().unwrap();
    let model = dir.path().join("m.bin");
    let out = hyperbox(&[
        &"train",
        &"--embeddings",
        &data("semeval/embeddings.txt"),
        &"--queries",
        &semeval("training", "data"),
        &"--gold",
        &semeval("trial", "gold"),
        &"--candidates",
        &data("semeval/vocabulary/2B.music.vocabulary.txt"),
        &"--out",
        &model,
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));
    assert!(!model.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn predictions_align_with_queries_and_respect_topk() {
    let dir = TempDir::new().unwrap();
    let model = train_small(&dir);
    let queries = std::fs::read_to_string(semeval("test", "data")).unwrap();
    for topk in ["1", "15"] {
        let pred = predict(&dir, &model, topk);
        let lines: Vec<&str> = pred.lines().collect();
        assert_eq!(lines.len(), queries.lines().count());
        for (line, query) in lines.iter().zip(queries.lines()) {
            if query.starts_with("xylorimba") {
                assert_eq!(*line, "", "OOV query must yield an empty line");
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if topk == "1" {
                assert_eq!(cols.len(), 1, "{line}");
            } else {
                // 16 vocabulary terms with embeddings; "theremin player" has none.
                assert_eq!(cols.len(), 15, "{line}");
                assert!(!cols.contains(&"theremin player"));
            }
        }
    }
}

#[test]
fn zero_topk_is_rejected() {
    let out = hyperbox(&[
        &"predict",
        &"--model",
        &"m",
        &"--embeddings",
        &"e",
        &"--queries",
        &"q",
        &"--candidates",
        &"c",
        &"--topk",
        &"0",
        &"--out",
        &"o",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dimension_mismatch_names_both_dimensions() {
    let dir = TempDir::new().unwrap();
    let model = train_small(&dir);
    let out = hyperbox(&[
        &"predict",
        &"--model",
        &model,
        &"--embeddings",
        &data("taxonomy/embeddings.txt"),
        &"--queries",
        &data("taxonomy/queries.txt"),
        &"--candidates",
        &data("taxonomy/candidates.txt"),
        &"--out",
        &dir.path().join("p.txt"),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("dimension 10") && msg.contains("dimension 20"), "{msg}");
}

#[test]
fn hand_scored_fixture() {
    let out = evaluate(&data("eval/predictions.txt"), &data("eval/gold.txt"));
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "42.50\t38.33\t25.00\t25.00\t20.00\t6.67\n"
    );
}

#[test]
fn perfect_and_empty_predictions() {
    let dir = TempDir::new().unwrap();
    let gold = data("eval/gold.txt");
    let out = evaluate(&gold, &gold);
    let line = String::from_utf8(out.stdout).unwrap();
    assert!(line.starts_with("100.00\t100.00\t100.00\t"), "{line}");

    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "\n\n\n\n").unwrap();
    let out = evaluate(&empty, &gold);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "0.00\t0.00\t0.00\t0.00\t0.00\t0.00\n"
    );
}

#[test]
fn misaligned_evaluation_reports_line_counts() {
    let dir = TempDir::new().unwrap();
    let short = dir.path().join("short.txt");
    std::fs::write(&short, "music genre\n").unwrap();
    let out = evaluate(&short, &data("eval/gold.txt"));
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains('1') && msg.contains('4'), "{msg}");
    assert!(out.stdout.is_empty());
}
