//! Subcommand implementations. Each returns the process exit code on success.

use std::path::{Path, PathBuf};

use robust_mdp::baselines::run_baseline;
use robust_mdp::forge::{
    garnet_document, healthcare_document, machine_document, GarnetParams, HealthcareParams, InstanceDocument,
    MachineParams,
};
use robust_mdp::{
    duality_gap, run_fom_vi, AdversarialKernel, FomViOptions, GapReport, InitMode, Method, Policy,
    RobustMdp, Schedule, SolveReport, UncertaintyKind, ViOptions,
};
use serde::{Deserialize, Serialize};

use crate::cli::{BenchArgs, GapArgs, GenArgs, Generator, SolveArgs};
use crate::config::{
    parse_kind, parse_method, resolve_out_dir, FileConfig, RunConfig, DEFAULT_BRANCH, DEFAULT_SWEEP_CAP,
};
use crate::error::{exit, CliError};
use crate::output::{write_csv, write_text, BenchRecord, RunLabel, BENCH_COLUMNS, TRACE_COLUMNS};

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))
}

pub fn read_instance(path: &Path) -> Result<InstanceDocument, CliError> {
    Ok(InstanceDocument::from_json(&read_text(path)?)?)
}

pub fn cmd_gen(args: &GenArgs) -> Result<u8, CliError> {
    let kind = args.kind.as_deref().map(parse_kind).transpose()?.unwrap_or(UncertaintyKind::Ellipsoidal);
    if args.generator != Generator::Garnet && (args.actions.is_some() || args.branch.is_some()) {
        return Err(CliError::Usage("--actions and --branch apply to garnet only".into()));
    }
    let mut doc = match args.generator {
        Generator::Garnet => {
            let mut params = GarnetParams { seed: args.seed, ..Default::default() };
            if let Some(s) = args.states {
                params.num_states = s;
            }
            if let Some(a) = args.actions {
                params.num_actions = a;
            }
            if let Some(b) = args.branch {
                params.n_branch = b;
            }
            if let Some(d) = args.discount {
                params.discount = d;
            }
            garnet_document(&params, kind)?
        }
        Generator::Machine => {
            let mut params = MachineParams { seed: args.seed, kind, ..Default::default() };
            if let Some(s) = args.states {
                params.num_states = s;
                params.radius = (2.0 * s as f64).sqrt();
            }
            if let Some(n) = args.samples {
                params.samples = n;
            }
            if let Some(d) = args.discount {
                params.discount = d;
            }
            machine_document(&params)?
        }
        Generator::Healthcare => {
            let mut params = HealthcareParams { seed: args.seed, kind, ..Default::default() };
            if let Some(s) = args.states {
                params.num_states = s;
            }
            if let Some(n) = args.samples {
                params.samples = n;
            }
            if let Some(d) = args.discount {
                params.discount = d;
            }
            healthcare_document(&params)?
        }
    };
    if let Some(r) = args.radius {
        let spec = robust_mdp::UncertaintySpec { kind, radius: r };
        doc.instance = doc.instance.with_uncertainty(spec);
        doc.instance.validate()?;
    }
    let path = match &args.out {
        Some(p) => p.clone(),
        None => {
            let dir = resolve_out_dir(args.out_dir.as_deref(), &FileConfig::default());
            dir.join(format!(
                "{}_s{}_a{}_seed{}.json",
                args.generator.as_str(),
                doc.instance.num_states(),
                doc.instance.num_actions(),
                args.seed
            ))
        }
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_text(&path, &(doc.to_json_pretty()?))?;
    println!("{}", path.display());
    Ok(exit::SUCCESS)
}

/// Runs one method with resolved settings. Baseline pairs get a duality-gap
/// recheck at `epsilon / 100` so every report carries a certified gap.
pub fn solve_instance(
    instance: &RobustMdp,
    config: &RunConfig,
    init: InitMode,
) -> Result<SolveReport, CliError> {
    let gap_tol = config.epsilon / 100.0;
    let report = match config.method {
        Method::FomVi => {
            let defaults = Schedule::default();
            let options = FomViOptions {
                norm_pair: config.norm_pair.unwrap_or(robust_mdp::NormPair::L2L2),
                schedule: Schedule {
                    p: config.p.unwrap_or(defaults.p),
                    q: config.q.unwrap_or(defaults.q),
                    max_epochs: config.max_epochs.unwrap_or(defaults.max_epochs),
                    gap_check_period: config.gap_check_period.unwrap_or(defaults.gap_check_period),
                    target: config.epsilon,
                },
                init,
                gap_tol: Some(gap_tol),
                max_wall_seconds: config.max_wall_seconds,
                ..Default::default()
            };
            run_fom_vi(instance, &options)?
        }
        method => {
            let mut options = ViOptions::new(config.epsilon);
            options.max_sweeps = config.max_epochs.unwrap_or(DEFAULT_SWEEP_CAP);
            options.max_wall_seconds = config.max_wall_seconds;
            if let Some(m) = config.memory {
                options.memory = m;
            }
            let mut report = run_baseline(instance, method, &options)?;
            report.final_gap = Some(duality_gap(instance, &report.policy, &report.kernel, gap_tol)?);
            report
        }
    };
    Ok(report)
}

/// Report JSON: the solver report plus the run's identity and settings.
#[derive(Debug, Serialize)]
pub struct RunDocument<'a> {
    pub run_id: &'a str,
    pub instance_path: String,
    pub seed: Option<u64>,
    pub config: &'a RunConfig,
    pub return_value: f64,
    #[serde(flatten)]
    pub report: &'a SolveReport,
}

pub fn cmd_solve(args: &SolveArgs) -> Result<u8, CliError> {
    let file = FileConfig::load_opt(args.solver.config.as_deref())?;
    let method = args.method.as_deref().or(file.method.as_deref()).map(parse_method).transpose()?;
    let config = RunConfig::resolve(method.unwrap_or(Method::FomVi), &args.solver, &file, true)?;
    let doc = read_instance(&args.instance)?;
    let seed = args.seed.or(file.seed).or(doc.provenance.as_ref().map(|p| p.seed));
    let init = if args.random_init {
        InitMode::Random { seed: seed.unwrap_or(0) }
    } else {
        InitMode::Uniform
    };
    let run_id = args.run_id.clone().unwrap_or_else(|| {
        let stem = args.instance.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        format!("{stem}_{}", config.method)
    });

    let report = solve_instance(&doc.instance, &config, init)?;

    create_dir(&config.out_dir)?;
    let label = RunLabel { run_id: &run_id, config: &config, instance: &doc.instance, seed };
    let trace_path = config.out_dir.join(format!("{run_id}.trace.csv"));
    write_csv(&trace_path, &TRACE_COLUMNS, &label.trace_records(&report))?;
    let run_doc = RunDocument {
        run_id: &run_id,
        instance_path: args.instance.display().to_string(),
        seed,
        config: &config,
        return_value: report.reported_value(&doc.instance),
        report: &report,
    };
    let report_path = config.out_dir.join(format!("{run_id}.report.json"));
    let text = serde_json::to_string_pretty(&run_doc).map_err(|e| CliError::json("serializing report", e))?;
    write_text(&report_path, &text)?;

    let gap = report.final_gap.as_ref().map(|g| g.gap);
    println!(
        "{run_id}: {} after {} epochs, certified gap {}",
        report.stop_reason.as_str(),
        report.epochs,
        gap.map_or("n/a".to_string(), |g| format!("{g:.3e}"))
    );
    Ok(if report.converged { exit::SUCCESS } else { exit::BUDGET_EXHAUSTED })
}

#[derive(Debug, Deserialize)]
struct PairDocument {
    policy: Policy,
    kernel: AdversarialKernel,
}

pub fn cmd_gap(args: &GapArgs) -> Result<u8, CliError> {
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(CliError::Usage(format!("tol must be positive (got {})", args.tol)));
    }
    let doc = read_instance(&args.instance)?;
    let inst = &doc.instance;
    let pair: PairDocument = serde_json::from_str(&read_text(&args.pair)?)
        .map_err(|e| CliError::json(format!("reading pair from {}", args.pair.display()), e))?;
    // re-validate: deserialization bypasses the constructors
    let x = Policy::from_rows(pair.policy.num_states(), pair.policy.num_actions(), pair.policy.as_slice().to_vec())?;
    let y = AdversarialKernel::from_rows(pair.kernel.num_states(), pair.kernel.num_actions(), pair.kernel.as_slice().to_vec())?;
    if x.num_states() != inst.num_states() || x.num_actions() != inst.num_actions() || y.num_states() != inst.num_states() || y.num_actions() != inst.num_actions() {
        return Err(CliError::Usage("pair dimensions do not match the instance".into()));
    }
    let report: GapReport = duality_gap(inst, &x, &y, args.tol)?;
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::json("serializing gap report", e))?;
    match &args.out {
        Some(path) => write_text(path, &text)?,
        None => println!("{text}"),
    }
    Ok(exit::SUCCESS)
}

/// Sweep order: size, then seed, then method.
pub fn cmd_bench(args: &BenchArgs) -> Result<u8, CliError> {
    let file = FileConfig::load_opt(args.solver.config.as_deref())?;
    let sizes = args.sizes.clone().or_else(|| file.sizes.clone()).unwrap_or_else(|| vec![5, 10]);
    let seeds = args.seeds.clone().or_else(|| file.seeds.clone()).unwrap_or_else(|| vec![0, 1, 2]);
    let method_names = args
        .methods
        .clone()
        .or_else(|| file.methods.clone())
        .unwrap_or_else(|| vec!["fom_vi".into(), "vi".into()]);
    let methods = method_names.iter().map(|m| parse_method(m)).collect::<Result<Vec<_>, _>>()?;
    let kind = args
        .kind
        .as_deref()
        .or(file.kind.as_deref())
        .map(parse_kind)
        .transpose()?
        .unwrap_or(UncertaintyKind::Ellipsoidal);
    let branch = args.branch.or(file.n_branch).unwrap_or(DEFAULT_BRANCH);
    if sizes.is_empty() || seeds.is_empty() || methods.is_empty() {
        return Err(CliError::Usage("sizes, seeds and methods must be non-empty".into()));
    }
    let configs = methods
        .iter()
        .map(|&m| RunConfig::resolve(m, &args.solver, &file, false))
        .collect::<Result<Vec<_>, _>>()?;
    let out_dir: PathBuf = configs[0].out_dir.clone();
    create_dir(&out_dir)?;

    let mut rows = Vec::new();
    let mut traces = Vec::new();
    for &size in &sizes {
        for &seed in &seeds {
            let params = GarnetParams { n_branch: branch, ..GarnetParams::new(size, size, seed) };
            let instance = robust_mdp::gen_garnet(&params, kind);
            for config in &configs {
                let run_id = format!("garnet_s{size}_a{size}_{}_seed{seed}_{}", kind.as_str(), config.method);
                let mut row = BenchRecord {
                    run_id: run_id.clone(),
                    method: config.method.as_str().to_string(),
                    norm_pair: config.norm_pair.map(|n| n.as_str().to_string()),
                    p: config.p,
                    q: config.q,
                    num_states: size,
                    num_actions: size,
                    uncertainty_kind: kind.as_str().to_string(),
                    alpha: params.radius(),
                    seed,
                    converged: None,
                    stop_reason: None,
                    epochs: None,
                    iterations: None,
                    return_value: None,
                    certified_gap: None,
                    elapsed_seconds: None,
                    error: None,
                };
                let outcome = match &instance {
                    Ok(inst) => solve_instance(inst, config, InitMode::Uniform).map(|r| (inst, r)),
                    Err(e) => Err(CliError::Usage(e.to_string())),
                };
                match outcome {
                    Ok((inst, report)) => {
                        let label = RunLabel { run_id: &run_id, config, instance: inst, seed: Some(seed) };
                        traces.extend(label.trace_records(&report));
                        row.converged = Some(report.converged);
                        row.stop_reason = Some(report.stop_reason.as_str().to_string());
                        row.epochs = Some(report.epochs);
                        row.iterations = Some(report.iterations);
                        row.return_value = Some(report.reported_value(inst));
                        row.certified_gap = report.final_gap.as_ref().map(|g| g.gap);
                        row.elapsed_seconds = Some(report.elapsed_seconds);
                    }
                    Err(e) => row.error = Some(e.to_string()),
                }
                eprintln!(
                    "{run_id}: {}",
                    row.error.clone().or_else(|| row.stop_reason.clone()).unwrap_or_default()
                );
                rows.push(row);
            }
        }
    }
    write_csv(&out_dir.join("bench.csv"), &BENCH_COLUMNS, &rows)?;
    write_csv(&out_dir.join("bench_traces.csv"), &TRACE_COLUMNS, &traces)?;
    println!("{}", out_dir.join("bench.csv").display());
    Ok(exit::SUCCESS)
}
