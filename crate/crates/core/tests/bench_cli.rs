use medsr::bench::{run_bench, write_outputs, BenchConfig, DomainSpec, ModelSpec};
use medsr::degrade::Profile;
use medsr::imagecore::write_pgm;
use medsr::models::ModelKind;
use medsr::synth::{phantom, Domain};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn medsr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_medsr")).args(args).output().expect("binary runs")
}

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

fn write_images(dir: &Path, domain: Domain, order: &[u64]) {
    fs::create_dir_all(dir).unwrap();
    for &seed in order {
        fs::write(dir.join(format!("img_{seed:02}.pgm")), write_pgm(&phantom(domain, 48, seed))).unwrap();
    }
}

fn small_config(root: &Path, corpus: &Path) -> BenchConfig {
    BenchConfig {
        domains: vec![DomainSpec { name: "Chest".into(), corpus: corpus.to_path_buf() }],
        scales: vec![2, 3],
        models: vec![ModelSpec::bicubic()],
        profile: Profile::Classical,
        seed: 3,
        output_dir: root.join("out"),
        base_dir: None,
    }
}

#[test]
fn metric_identity_prints_json() {
    let img = fixture("smoke/images");
    let first = fs::read_dir(&img).unwrap().map(|e| e.unwrap().path()).min().unwrap();
    let p = first.to_str().unwrap();
    let out = medsr(&["metric", "--ref", p, "--test", p, "--json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    let find = |key: &str| {
        v.as_object()
            .unwrap()
            .iter()
            .find(|(k, _)| k.to_lowercase().starts_with(key))
            .and_then(|(_, x)| x.as_f64())
            .unwrap_or_else(|| panic!("{key} missing from {v}"))
    };
    assert_eq!(find("psnr"), 100.0);
    assert_eq!(find("ssim"), 1.0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed: 0"));
}

#[test]
fn smoke_bench_writes_hashed_outputs_and_report_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg: Value = serde_json::from_str(&fs::read_to_string(fixture("configs/smoke.json")).unwrap()).unwrap();
    let base = fixture("configs");
    for d in cfg["domains"].as_array_mut().unwrap() {
        d["corpus"] = base.join(d["corpus"].as_str().unwrap()).to_str().unwrap().into();
    }
    for m in cfg["models"].as_array_mut().unwrap() {
        if let Some(w) = m.get_mut("weights").and_then(Value::as_object_mut) {
            for p in w.values_mut() {
                *p = base.join(p.as_str().unwrap()).to_str().unwrap().into();
            }
        }
    }
    let out_dir = tmp.path().join("out");
    cfg["output_dir"] = out_dir.to_str().unwrap().into();
    let cfg_path = tmp.path().join("smoke.json");
    fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();

    let out = medsr(&["bench", "--config", cfg_path.to_str().unwrap()]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(out.status.success(), "{stderr}");
    assert!(stderr.contains("seed: 0"), "{stderr}");

    let manifest: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    for name in ["results.csv", "results.json", "report.md"] {
        let bytes = fs::read(out_dir.join(name)).unwrap();
        let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(manifest["outputs"][name].as_str(), Some(digest.as_str()), "{name}");
    }
    assert_eq!(manifest["seed"], 0);

    let run = out_dir.join("results.json");
    let report = medsr(&["report", "--run", run.to_str().unwrap()]);
    assert!(report.status.success());
    assert_eq!(report.stdout, fs::read(out_dir.join("report.md")).unwrap());
}

#[test]
fn config_hash_tracks_every_field() {
    let base = small_config(Path::new("/r"), Path::new("/c"));
    let h = base.hash();
    assert_eq!(base.clone().hash(), h);
    let mut moved = base.clone();
    moved.base_dir = Some("/elsewhere".into());
    assert_eq!(moved.hash(), h);

    let variants: Vec<Box<dyn Fn(&mut BenchConfig)>> = vec![
        Box::new(|c| c.domains[0].name.push('x')),
        Box::new(|c| c.domains[0].corpus = "/d".into()),
        Box::new(|c| c.scales = vec![2]),
        Box::new(|c| c.models.push(ModelSpec { kind: ModelKind::Srcnn, weights: Default::default() })),
        Box::new(|c| c.profile = Profile::HighOrder),
        Box::new(|c| c.seed += 1),
        Box::new(|c| c.output_dir = "/o".into()),
    ];
    for (i, f) in variants.iter().enumerate() {
        let mut c = base.clone();
        f(&mut c);
        assert_ne!(c.hash(), h, "variant {i}");
    }
}

#[test]
fn aggregates_ignore_file_creation_order() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    write_images(&a.join("corpus"), Domain::Chest, &[0, 1, 2, 3]);
    write_images(&b.join("corpus"), Domain::Chest, &[3, 1, 0, 2]);
    let ra = run_bench(&small_config(&a, &a.join("corpus"))).unwrap();
    let rb = run_bench(&small_config(&b, &b.join("corpus"))).unwrap();
    assert_eq!(ra.cells.len(), rb.cells.len());
    for (x, y) in ra.cells.iter().zip(&rb.cells) {
        assert_eq!(x.mean, y.mean);
        assert_eq!(x.images, y.images);
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    write_images(&corpus, Domain::Brain, &[0, 1, 2]);
    let mut cfg = small_config(tmp.path(), &corpus);
    let weights = [(2, fixture("weights/srcnn_x2.msrw"))].into_iter().collect();
    cfg.models.push(ModelSpec { kind: ModelKind::Srcnn, weights });
    cfg.scales = vec![2];
    let run_with = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_bench(&cfg)).unwrap()
    };
    let (one, four) = (run_with(1), run_with(4));
    assert_eq!(one.cells, four.cells);
    let dir = tmp.path().join("emitted");
    let files = write_outputs(&one, &dir).unwrap();
    let again = write_outputs(&four, &tmp.path().join("emitted2")).unwrap();
    assert_eq!(fs::read(files.csv).unwrap(), fs::read(again.csv).unwrap());
}
