//! Directory-wide verification.
//!
//! Every `*.json` file in the directory is one instance:
//! `{"identity": "eq5", "integrand": {...}, "M": {...}, "N": {...},
//! "options": {"theta", "side", "force", "tol", "probes"}}` with `options`
//! optional. Files are processed in name order and each is parsed and
//! verified on its own, so one bad file does not affect the others.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{json, Value};
use stieltjes::random::{InstanceGenerator, InstanceShape};
use stieltjes::substitution::Identity;
use stieltjes::{verify_batch, Execution, Instance, InverseSide, VerifyOptions};

use crate::doc::{self, DocError, Num};
use crate::{Failure, Outcome};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptionsDoc {
    theta: Option<Num>,
    side: Option<SideDoc>,
    #[serde(default)]
    force: bool,
    tol: Option<f64>,
    #[serde(default)]
    probes: Vec<Num>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SideDoc {
    Left,
    Right,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    identity: String,
    integrand: Value,
    #[serde(rename = "M")]
    m: Value,
    #[serde(rename = "N")]
    n: Value,
    #[serde(default)]
    options: OptionsDoc,
}

fn nested<T>(
    field: &str,
    value: Value,
    build: fn(Value) -> Result<T, DocError>,
) -> Result<T, DocError> {
    build(value).map_err(|e| DocError {
        path: if e.path.is_empty() {
            field.to_string()
        } else {
            format!("{field}.{}", e.path)
        },
        message: e.message,
    })
}

fn parse_instance(text: &str) -> Result<Instance, DocError> {
    let value = doc::parse_json(text)?;
    let raw: InstanceDoc = serde_path_to_error::deserialize(value).map_err(|e| DocError {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    let identity = Identity::from_tag(&raw.identity)
        .filter(|id| !id.is_inequality())
        .ok_or_else(|| DocError {
            path: "identity".into(),
            message: format!(
                "unknown identity tag {:?} (expected eq1..eq6)",
                raw.identity
            ),
        })?;
    let opts = raw.options;
    Ok(Instance {
        identity,
        integrand: nested("integrand", raw.integrand, doc::integrand_from_value)?,
        m: nested("M", raw.m, doc::monotone_from_value)?,
        n: nested("N", raw.n, doc::monotone_from_value)?,
        options: VerifyOptions {
            theta: opts
                .theta
                .map_or_else(|| VerifyOptions::default().theta, |t| t.0),
            side: match opts.side {
                Some(SideDoc::Right) => InverseSide::Right,
                _ => InverseSide::Left,
            },
            force: opts.force,
            tolerance: opts.tol,
            probes: opts.probes.into_iter().map(|p| p.0).collect(),
        },
    })
}

fn instance_files(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<_>>()?;
    files.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == "json"));
    files.sort();
    Ok(files)
}

#[cfg(feature = "parallel")]
fn verify_all(
    instances: &[Instance],
    jobs: Option<usize>,
) -> Vec<stieltjes::Result<stieltjes::VerificationReport>> {
    match jobs {
        Some(1) => verify_batch(instances, Execution::Sequential),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(|| verify_batch(instances, Execution::Parallel)))
            .unwrap_or_else(|_| verify_batch(instances, Execution::Sequential)),
        None => verify_batch(instances, Execution::Parallel),
    }
}

#[cfg(not(feature = "parallel"))]
fn verify_all(
    instances: &[Instance],
    _jobs: Option<usize>,
) -> Vec<stieltjes::Result<stieltjes::VerificationReport>> {
    verify_batch(instances, Execution::Sequential)
}

/// Exit code: 1 if any file is malformed, else 3 if any precondition fails,
/// else 2 if any check fails.
pub fn run(dir: &Path, jobs: Option<usize>) -> Outcome {
    if jobs == Some(0) {
        return Err(Failure::Usage("--jobs must be at least 1".into()));
    }
    let files = instance_files(dir)
        .map_err(|e| Failure::Usage(format!("cannot list {}: {e}", dir.display())))?;
    let mut entries: Vec<Value> = Vec::with_capacity(files.len());
    let mut parsed: Vec<(usize, Instance)> = Vec::new();
    let mut malformed = false;
    for (i, path) in files.iter().enumerate() {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let result = fs::read_to_string(path)
            .map_err(|e| DocError {
                path: String::new(),
                message: format!("cannot read: {e}"),
            })
            .and_then(|t| parse_instance(&t));
        match result {
            Ok(inst) => {
                parsed.push((i, inst));
                entries.push(json!({ "file": name }));
            }
            Err(err) => {
                malformed = true;
                let failure = Failure::Input {
                    source: name.clone(),
                    err,
                };
                eprintln!("error: {}", failure.message());
                entries.push(json!({ "file": name, "error": failure.json()["error"] }));
            }
        }
    }
    let instances: Vec<Instance> = parsed.iter().map(|(_, inst)| inst.clone()).collect();
    let results = verify_all(&instances, jobs);
    let (mut precondition, mut failed) = (false, false);
    for ((i, _), result) in parsed.iter().zip(results) {
        match result {
            Ok(report) => {
                failed |= !report.pass;
                entries[*i]["report"] = doc::report_json(&report);
            }
            Err(e) => {
                precondition |= e.is_precondition();
                malformed |= !e.is_precondition();
                let failure = Failure::Core(e);
                eprintln!("error: {}: {}", entries[*i]["file"], failure.message());
                entries[*i]["error"] = failure.json()["error"].clone();
            }
        }
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&Value::Array(entries)).expect("serializable")
    );
    Ok(if malformed {
        1
    } else if precondition {
        3
    } else if failed {
        2
    } else {
        0
    })
}

/// Writes `count` random instances for `identity`; returns the file paths.
pub fn write_instances(
    dir: &Path,
    identity: Identity,
    gen: &mut InstanceGenerator,
    shape: &InstanceShape,
    count: usize,
) -> io::Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let on_range = matches!(identity, Identity::Eq2 | Identity::Eq6);
    (0..count)
        .map(|k| {
            let inst = gen.instance(shape);
            let integrand = if on_range { &inst.g } else { &inst.f };
            let value = json!({
                "identity": identity.tag(),
                "integrand": doc::integrand_json(integrand),
                "M": doc::monotone_json(&inst.m),
                "N": doc::monotone_json(&inst.n),
            });
            let path = dir.join(format!("instance-{k:04}.json"));
            fs::write(
                &path,
                serde_json::to_string_pretty(&value).expect("serializable"),
            )?;
            Ok(path.display().to_string())
        })
        .collect()
}
