//! `vrx`: construct exact weight-truncated vertex rings and verify their
//! defining identities at desk scale.

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde_json::{json, Map, Value};
use std::process::ExitCode;
use std::str::FromStr;
use vrx_cli::{default_suites, parse_instance, run_suite, CheckReport, SuiteConfig};
use vrx_core::basering::RingDescriptor;
use vrx_core::exactnum;
use vrx_core::fields;
use vrx_core::hsderiv;
use vrx_core::pierce;
use vrx_core::structure;
use vrx_core::vertexcore::checks::{self, GridConfig};
use vrx_core::vertexcore::Instance;
use vrx_core::virasoro::{self, VirasoroParams};

#[derive(Parser)]
#[command(
    name = "vrx",
    version,
    about = "Exact truncated vertex rings over commutative base rings: construction and identity verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Emit machine-readable JSON on stdout
    #[arg(long, global = false)]
    json: bool,
    /// Seed for any randomized sampling (kept fixed for reproducibility)
    #[arg(long, default_value_t = 0xC0FFEE)]
    seed: u64,
    /// Truncation bound for graded builds and cap for tensor products
    #[arg(long, default_value_t = 6)]
    max_weight: i64,
    /// Write the JSON report to a file as well
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generalized binomial coefficients and the four identities
    Binom {
        /// Upper argument (any integer)
        m: Option<String>,
        /// Lower argument (any integer)
        n: Option<String>,
        /// Exhaustively verify the four binomial identities
        #[arg(long)]
        check_identities: bool,
        /// Grid bound for the identity check
        #[arg(long, default_value_t = 20)]
        range: i64,
        #[command(flatten)]
        common: Common,
    },
    /// Hasse-Schmidt derivation demonstrations
    Hs {
        #[command(subcommand)]
        action: HsAction,
    },
    /// Run identity suites against an instance
    Verify {
        /// Instance spec, e.g. virasoro:z:1 or dsum(comm:zmod:3,virasoro:zmod:3:1)
        #[arg(long)]
        instance: String,
        /// Comma-separated suite list; defaults to all
        #[arg(long)]
        suite: Option<String>,
        /// Window policy (only "auto" is implemented)
        #[arg(long, default_value = "auto")]
        window: String,
        /// Basis labels up to this weight enter the grids
        #[arg(long, default_value_t = 4)]
        grid_weight: i64,
        /// Mode range for the identity grids
        #[arg(long, default_value_t = 3)]
        mode_range: i64,
        /// Negative-control fixture: corrupt one structure constant
        #[arg(long, hide = true)]
        corrupt_fixture: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Virasoro instance construction and export
    Virasoro {
        #[command(subcommand)]
        action: VirasoroAction,
    },
    /// Rebuild all vertex operators from the generators by residue
    /// products and compare with the straightening pipeline
    Reconstruct {
        #[arg(long)]
        instance: String,
        #[command(flatten)]
        common: Common,
    },
    /// Center, idempotents, direct sums and tensor products
    Structure {
        /// Instance spec (twice for dsum/tensor)
        #[arg(long = "instance")]
        instances: Vec<String>,
        /// One of: center, idempotents, dsum, tensor
        #[arg(long)]
        op: String,
        #[command(flatten)]
        common: Common,
    },
    /// Pierce bundle over the finite Stone space
    Pierce {
        #[arg(long)]
        instance: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum HsAction {
    /// Build a truncated polynomial ring with divided powers and run
    /// every derivation checker
    Demo {
        #[arg(long, default_value = "z")]
        base: String,
        #[arg(long, default_value = "x")]
        var: String,
        #[arg(long, default_value_t = 12)]
        degree: i64,
        #[arg(long, default_value_t = 8)]
        cutoff: i64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum VirasoroAction {
    /// Build the truncated universal Virasoro vertex ring and export its
    /// structure constants
    Build {
        #[arg(long, default_value = "z")]
        base: String,
        #[arg(long, default_value_t = 1)]
        cprime: i64,
        #[arg(long)]
        lift: Option<i64>,
        #[command(flatten)]
        common: Common,
    },
}

fn emit(common: &Common, value: &Value, human: &[String]) -> std::io::Result<()> {
    let rendered = serde_json::to_string_pretty(value).expect("serializable");
    if let Some(path) = &common.out {
        std::fs::write(path, rendered.as_bytes())?;
    }
    if common.json {
        println!("{rendered}");
    } else {
        for line in human {
            println!("{line}");
        }
    }
    Ok(())
}

fn reports_json(reports: &[CheckReport]) -> Value {
    json!({
        "schemaVersion": vrx_cli::SCHEMA_VERSION,
        "reports": reports,
    })
}

fn reports_human(reports: &[CheckReport]) -> Vec<String> {
    reports.iter().map(|r| r.line()).collect()
}

fn exit_for(reports: &[CheckReport]) -> ExitCode {
    if reports.iter().all(|r| r.ok()) {
        ExitCode::from(0)
    } else {
        ExitCode::from(1)
    }
}

fn fail(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => fail(&e),
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Binom { m, n, check_identities, range, common } => {
            if check_identities {
                let reports = exactnum::check_binomial_identities(range, range, range);
                let value = json!({
                    "schemaVersion": vrx_cli::SCHEMA_VERSION,
                    "identities": reports.iter().map(|r| json!({
                        "identity": r.identity,
                        "range": range,
                        "cases": r.cases,
                        "pass": r.pass,
                        "counterexample": r.counterexample.map(|(m, r0, n)| format!("m={m}, r={r0}, n={n}")),
                    })).collect::<Vec<_>>(),
                });
                let human: Vec<String> = reports
                    .iter()
                    .map(|r| {
                        format!(
                            "{} ({} cases): {}",
                            r.identity,
                            r.cases,
                            if r.pass { "pass" } else { "FAIL" }
                        )
                    })
                    .collect();
                emit(&common, &value, &human).map_err(|e| e.to_string())?;
                return Ok(if reports.iter().all(|r| r.pass) {
                    ExitCode::from(0)
                } else {
                    ExitCode::from(1)
                });
            }
            let (Some(m), Some(n)) = (m, n) else {
                return Err("binom needs <m> <n> or --check-identities".to_string());
            };
            let m = BigInt::from_str(&m).map_err(|_| "m must be an integer".to_string())?;
            let n = BigInt::from_str(&n).map_err(|_| "n must be an integer".to_string())?;
            println!("{}", exactnum::binom(&m, &n));
            Ok(ExitCode::from(0))
        }

        Command::Hs { action } => match action {
            HsAction::Demo { base, var, degree, cutoff, common } => {
                let base = RingDescriptor::parse(&base).map_err(|e| e.to_string())?;
                let carrier = hsderiv::CommCarrier::poly_truncated(base.clone(), &var, degree);
                let family = hsderiv::HsFamily::divided_power(&carrier, cutoff.max(degree));
                let basis = carrier.basis_states();
                let mut pairs = Vec::new();
                for u in &basis {
                    for v in &basis {
                        pairs.push((u.clone(), v.clone()));
                    }
                }
                let mut grids = vec![
                    hsderiv::check_hs_property(&family, |a, b| carrier.mul(a, b), &pairs),
                    hsderiv::check_iterative(&family, &basis),
                    hsderiv::check_inverse_series(&family, &basis).map_err(|e| e.to_string())?,
                ];
                let inst = hsderiv::vertex_from_hs_comm(
                    &format!("commhs:poly:{base}:{var}:deg={degree}"),
                    &carrier,
                    &family,
                )
                .map_err(|e| e.to_string())?;
                let cfg = GridConfig::default_for(&inst)
                    .with_max_weight(degree.min(4))
                    .with_modes(-3, 2);
                grids.push(checks::check_vacuum_theorem(&inst));
                grids.push(checks::check_jacobi(&inst, &cfg));
                let reports: Vec<CheckReport> = grids
                    .iter()
                    .map(|g| CheckReport::from_grid(&inst.name, g))
                    .collect();
                emit(&common, &reports_json(&reports), &reports_human(&reports))
                    .map_err(|e| e.to_string())?;
                Ok(exit_for(&reports))
            }
        },

        Command::Verify {
            instance,
            suite,
            window,
            grid_weight,
            mode_range,
            corrupt_fixture,
            common,
        } => {
            if window != "auto" {
                return Err("only --window auto is implemented".to_string());
            }
            let suites = match suite {
                Some(s) => s.split(',').map(|x| x.trim().to_string()).collect(),
                None => default_suites(),
            };
            let cfg = SuiteConfig {
                max_weight: common.max_weight,
                grid_weight,
                mode_min: -mode_range,
                mode_max: mode_range,
                locality_t_max: 8,
                seed: common.seed,
                corrupt: corrupt_fixture,
            };
            let reports = run_suite(&instance, &suites, &cfg).map_err(|e| e.to_string())?;
            emit(&common, &reports_json(&reports), &reports_human(&reports))
                .map_err(|e| e.to_string())?;
            Ok(exit_for(&reports))
        }

        Command::Virasoro { action } => match action {
            VirasoroAction::Build { base, cprime, lift, common } => {
                let base = RingDescriptor::parse(&base).map_err(|e| e.to_string())?;
                let build = virasoro::build(&VirasoroParams {
                    base,
                    cprime: BigInt::from(cprime),
                    lift: lift.map(BigInt::from),
                    max_weight: common.max_weight,
                });
                let inst = &build.instance;
                let mut basis_by_weight = Map::new();
                for (w, ids) in &inst.by_weight {
                    basis_by_weight.insert(
                        w.to_string(),
                        Value::Array(
                            ids.iter()
                                .map(|&i| Value::String(inst.labels[i as usize].name.clone()))
                                .collect(),
                        ),
                    );
                }
                let mut constants = Vec::new();
                for u in inst.all_labels() {
                    for v in inst.all_labels() {
                        let e = inst.pair(u, v);
                        for (n, s) in &e.values {
                            let mut vec = Map::new();
                            for (id, c) in &s.coeffs {
                                vec.insert(
                                    inst.labels[*id as usize].name.clone(),
                                    Value::String(c.to_string()),
                                );
                            }
                            constants.push(json!([
                                inst.labels[u as usize].name,
                                n,
                                inst.labels[v as usize].name,
                                Value::Object(vec),
                            ]));
                        }
                    }
                }
                let mut dm_tables = Map::new();
                for (m, table) in build.dm.iter().enumerate() {
                    if m == 0 {
                        continue;
                    }
                    let mut per_label = Map::new();
                    for (id, s) in table {
                        let mut vec = Map::new();
                        for (tid, c) in &s.coeffs {
                            vec.insert(
                                inst.labels[*tid as usize].name.clone(),
                                Value::String(c.to_string()),
                            );
                        }
                        per_label
                            .insert(inst.labels[*id as usize].name.clone(), Value::Object(vec));
                    }
                    dm_tables.insert(m.to_string(), Value::Object(per_label));
                }
                let voa = virasoro::check_voa_axioms(&build, 6.min(common.max_weight));
                let grids = vec![
                    checks::check_vacuum_theorem(inst),
                    voa.l0_report.clone(),
                    voa.dm_factorial_report.clone(),
                ];
                let reports: Vec<CheckReport> =
                    grids.iter().map(|g| CheckReport::from_grid(&inst.name, g)).collect();
                let value = json!({
                    "schemaVersion": vrx_cli::SCHEMA_VERSION,
                    "instance": inst.name,
                    "basisByWeight": Value::Object(basis_by_weight),
                    "structureConstants": constants,
                    "dmTables": Value::Object(dm_tables),
                    "checksRun": reports,
                });
                let mut human = vec![format!(
                    "built {} with {} basis states",
                    inst.name,
                    inst.labels.len()
                )];
                human.extend(reports_human(&reports));
                emit(&common, &value, &human).map_err(|e| e.to_string())?;
                Ok(exit_for(&reports))
            }
        },

        Command::Reconstruct { instance, common } => {
            let spec = parse_instance(&instance).map_err(|e| e.to_string())?;
            let inst = spec.build(common.max_weight).map_err(|e| e.to_string())?;
            let cfg = GridConfig::default_for(&inst)
                .with_max_weight(common.max_weight.min(4))
                .with_modes(-4, 4);
            let rec = fields::reconstruct_from_generators(&inst, 8, &cfg)
                .map_err(|e| e.to_string())?;
            let mut per_label = Vec::new();
            for (id, rep) in &rec.per_label {
                per_label.push(json!({
                    "label": inst.labels[*id as usize].name,
                    "passed": rep.passed,
                    "skipped": rep.skipped,
                    "failed": rep.failed,
                }));
            }
            let overall = CheckReport::from_grid(&instance, &rec.overall);
            let value = json!({
                "schemaVersion": vrx_cli::SCHEMA_VERSION,
                "instance": instance,
                "overall": overall,
                "perLabel": per_label,
            });
            let human = vec![overall.line()];
            emit(&common, &value, &human).map_err(|e| e.to_string())?;
            Ok(exit_for(&[overall]))
        }

        Command::Structure { instances, op, common } => {
            let get_one = || -> Result<Instance, String> {
                let spec_str = instances
                    .first()
                    .ok_or_else(|| "structure needs at least one --instance".to_string())?;
                parse_instance(spec_str)
                    .and_then(|s| s.build(common.max_weight))
                    .map_err(|e| e.to_string())
            };
            match op.as_str() {
                "center" => {
                    let inst = get_one()?;
                    let c = structure::center_truncated(&inst);
                    let mut per_weight = Map::new();
                    for (w, gens) in &c.per_weight {
                        per_weight.insert(
                            w.to_string(),
                            json!({
                                "generators": gens
                                    .iter()
                                    .map(|g| inst.render_state(g))
                                    .collect::<Vec<_>>(),
                                "directConditionHolds": c.cross_check[w].ok(),
                            }),
                        );
                    }
                    let value = json!({
                        "schemaVersion": vrx_cli::SCHEMA_VERSION,
                        "instance": inst.name,
                        "certification": match c.certification {
                            structure::CenterCertification::Exact => "exact",
                            structure::CenterCertification::TruncationBounded => "truncation-bounded",
                        },
                        "perWeight": Value::Object(per_weight),
                    });
                    let human = vec![format!(
                        "center generators: {} (confirmed weights: {:?})",
                        c.total_generators(),
                        c.confirmed_weights()
                    )];
                    emit(&common, &value, &human).map_err(|e| e.to_string())?;
                    Ok(ExitCode::from(0))
                }
                "idempotents" => {
                    let inst = get_one()?;
                    let set = structure::find_idempotents(&inst, &[])
                        .map_err(|e| e.to_string())?;
                    let value = json!({
                        "schemaVersion": vrx_cli::SCHEMA_VERSION,
                        "instance": inst.name,
                        "count": set.elements.len(),
                        "exhaustive": set.exhaustive,
                        "elements": set.elements.iter().map(|e| inst.render_state(e)).collect::<Vec<_>>(),
                    });
                    let human = vec![format!(
                        "{} idempotents ({})",
                        set.elements.len(),
                        if set.exhaustive { "exhaustive" } else { "candidate-bounded" }
                    )];
                    emit(&common, &value, &human).map_err(|e| e.to_string())?;
                    Ok(ExitCode::from(0))
                }
                "dsum" | "tensor" => {
                    if instances.len() != 2 {
                        return Err(format!("--op {op} needs exactly two --instance flags"));
                    }
                    let a = parse_instance(&instances[0])
                        .and_then(|s| s.build(common.max_weight))
                        .map_err(|e| e.to_string())?;
                    let b = parse_instance(&instances[1])
                        .and_then(|s| s.build(common.max_weight))
                        .map_err(|e| e.to_string())?;
                    let combined = if op == "dsum" {
                        structure::direct_sum(&a, &b).map_err(|e| e.to_string())?
                    } else {
                        structure::tensor_product(&a, &b, Some(common.max_weight))
                            .map_err(|e| e.to_string())?
                    };
                    let grids = vec![checks::check_vacuum_theorem(&combined)];
                    let reports: Vec<CheckReport> = grids
                        .iter()
                        .map(|g| CheckReport::from_grid(&combined.name, g))
                        .collect();
                    let dims: Map<String, Value> = combined
                        .graded_dimensions()
                        .iter()
                        .map(|(w, d)| (w.to_string(), json!(d)))
                        .collect();
                    let value = json!({
                        "schemaVersion": vrx_cli::SCHEMA_VERSION,
                        "instance": combined.name,
                        "dimensions": Value::Object(dims),
                        "checksRun": reports,
                    });
                    let mut human = vec![format!("built {}", combined.name)];
                    human.extend(reports_human(&reports));
                    emit(&common, &value, &human).map_err(|e| e.to_string())?;
                    Ok(exit_for(&reports))
                }
                other => Err(format!("unknown --op {other:?}")),
            }
        }

        Command::Pierce { instance, common } => {
            let spec = parse_instance(&instance).map_err(|e| e.to_string())?;
            let inst = spec.build(common.max_weight).map_err(|e| e.to_string())?;
            let idems =
                structure::find_idempotents(&inst, &[]).map_err(|e| e.to_string())?;
            let b = pierce::boolean_ring(&inst, &idems).map_err(|e| e.to_string())?;
            if !b.axioms.ok() {
                return Err(format!("boolean ring axioms failed: {}", b.axioms.summary()));
            }
            let bundle = pierce::build_pierce_bundle(&inst, &b).map_err(|e| e.to_string())?;
            let indecomposable =
                pierce::check_stalk_indecomposable(&bundle).map_err(|e| e.to_string())?;
            let sections = pierce::check_global_sections_iso(&inst, &bundle, 4096);
            let finite_enough = structure::enumerate_all_states(&inst, 4096).is_some();
            let (vnr_value, stalk_simplicity): (Value, Vec<Option<bool>>) = if finite_enough {
                let rep = pierce::check_vnr_simple_stalks(&inst, &idems, &bundle, 4096)
                    .map_err(|e| e.to_string())?;
                let vnr_rep =
                    pierce::is_vnr(&inst, &idems, 4096).map_err(|e| e.to_string())?;
                (
                    json!({
                        "verdict": rep.vnr,
                        "allStalksSimple": rep.all_stalks_simple,
                        "biconditionalHolds": rep.equivalent,
                        "witness": vnr_rep.witness.map(|w| inst.render_state(&w)),
                    }),
                    rep.stalk_simplicity.into_iter().map(Some).collect(),
                )
            } else {
                (
                    json!({ "verdict": Value::Null, "note": "instance too large for an exhaustive verdict" }),
                    bundle.stalks.iter().map(|_| None).collect(),
                )
            };
            let stalks: Vec<Value> = bundle
                .stalks
                .iter()
                .zip(&stalk_simplicity)
                .map(|(st, simple)| {
                    json!({
                        "atom": inst.render_state(&st.atom),
                        "descriptor": st.instance.base.to_string(),
                        "dimensions": st.instance
                            .graded_dimensions()
                            .iter()
                            .map(|(w, d)| (w.to_string(), json!(d)))
                            .collect::<Map<String, Value>>(),
                        "simple": simple,
                    })
                })
                .collect();
            let sections_ok = sections.ok();
            let value = json!({
                "schemaVersion": vrx_cli::SCHEMA_VERSION,
                "instance": inst.name,
                "idempotentCount": idems.elements.len(),
                "stonePoints": bundle.points.len(),
                "stalks": stalks,
                "stalksIndecomposable": indecomposable.ok(),
                "vnr": vnr_value,
                "globalSectionsIso": sections_ok,
            });
            let human = vec![
                format!("idempotents: {}", idems.elements.len()),
                format!("stone points: {}", bundle.points.len()),
                format!("global sections isomorphism: {}", if sections_ok { "pass" } else { "FAIL" }),
            ];
            emit(&common, &value, &human).map_err(|e| e.to_string())?;
            Ok(if sections_ok && indecomposable.ok() {
                ExitCode::from(0)
            } else {
                ExitCode::from(1)
            })
        }
    }
}
