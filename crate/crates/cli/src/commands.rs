use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use aptemper::config::{ImageSource, MixtureSource, SamplerConfig, TargetSpec};
use aptemper::io::{
    create, manifest_text, run_summary_rows, write_betas, write_level1, write_pgm, write_summary, TraceHeader,
    TraceWriter,
};
use aptemper::ladder::RhoBounds;
use aptemper::oracle::fixed_point_rho;
use aptemper::parallel::{with_workers, Execution};
use aptemper::sampler::{replicate, run_with, ReplicationTable};
use aptemper::target::TargetDensity;
use aptemper::{AdaptationMode, Error};
use log::info;

use crate::{Failure, OracleArgs, Overrides, Protocol, ReproduceArgs, RunArgs};

type CmdResult = Result<(), Failure>;

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn apply(config: &mut SamplerConfig, o: &Overrides) -> Result<(), Error> {
    if let Some(v) = o.seed {
        config.seed = v;
    }
    if let Some(v) = o.levels {
        config.levels = v;
    }
    if let Some(v) = o.iters {
        // a new length without an explicit burn-in gets the default N / 2
        *config = config.clone().with_iterations(v);
    }
    if let Some(v) = o.burnin {
        config.burn_in = v;
    }
    if let Some(v) = o.adaptation {
        config.adaptation = v;
    }
    if let Some(v) = o.thin {
        config.thin = v;
    }
    config.validate()
}

fn prepare_dir(dir: &Path) -> CmdResult {
    fs::create_dir_all(dir).map_err(|e| runtime(format!("cannot create {}: {e}", dir.display())))
}

fn started() -> String {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    format!("unix {secs}")
}

fn image_shape(config: &SamplerConfig) -> Result<Option<(usize, usize)>, Error> {
    Ok(match config.target.build()? {
        TargetDensity::Lattice(posterior) => Some(posterior.shape()),
        TargetDensity::Continuous(_) => None,
    })
}

pub fn run(args: RunArgs) -> CmdResult {
    if !args.config.is_file() {
        return Err(Failure::Usage(format!("config not found: {}", args.config.display())));
    }
    let mut config = SamplerConfig::load(&args.config)?;
    apply(&mut config, &args.overrides)?;
    config.record_state = true;
    let truth = config.target.true_moments()?;
    let shape = image_shape(&config)?;
    let dir = &args.out_dir;
    prepare_dir(dir)?;

    let start = Instant::now();
    let mut writer = TraceWriter::new(create(&dir.join("trace.jsonl"))?, &TraceHeader::for_config(&config))?;
    let mut records = Vec::new();
    let summary = with_workers(args.workers, || {
        run_with(&config, &[], |r| {
            records.push(r.clone());
            writer.write(r)
        })
    })?;
    writer.finish()?.flush().map_err(runtime)?;
    info!("sampling took {:.2} s", start.elapsed().as_secs_f64());

    write_summary(create(&dir.join("summary.csv"))?, &run_summary_rows(&summary, truth.as_ref()))?;
    write_betas(create(&dir.join("betas.csv"))?, &records)?;
    write_level1(create(&dir.join("level1.csv"))?, &records)?;
    let mut artifacts = vec!["trace.jsonl", "summary.csv", "betas.csv", "level1.csv"];
    if let Some((rows, cols)) = shape {
        write_pgm(create(&dir.join("posterior_mean.pgm"))?, rows, cols, &summary.coord_mean)?;
        artifacts.push("posterior_mean.pgm");
    }
    let manifest = manifest_text(&config, env!("CARGO_PKG_VERSION"), &started(), &artifacts);
    fs::write(dir.join("manifest.cfg"), manifest).map_err(runtime)?;

    println!("iterations {} (burn-in {}), seed {}", config.iterations, config.burn_in, config.seed);
    println!("final betas {:.6?}", summary.final_betas);
    println!("swap acceptance {:.3?}", summary.swap_accept_prob);
    if shape.is_none() {
        println!("E[X] {:.4?}", summary.coord_mean);
        println!("E[X^2] {:.4?}", summary.coord_sq_mean);
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn protocol_config(args: &ReproduceArgs) -> Result<SamplerConfig, Error> {
    let (target, levels, iterations, burn_in) = match args.protocol {
        Protocol::Table1 => (TargetSpec::Mixture(MixtureSource::Canonical), 5, 5000, 2500),
        Protocol::Table2 => (TargetSpec::Mixture(MixtureSource::Canonical), 3, 8333, 4167),
        Protocol::Table3 => {
            let n = args.sizes.first().copied().unwrap_or(10_000);
            (TargetSpec::Mixture(MixtureSource::CanonicalHard), 8, n, n / 2)
        }
        Protocol::Ising => {
            let mut target = TargetSpec::canonical_ising();
            if let (Some(path), TargetSpec::Ising { image, .. }) = (&args.image, &mut target) {
                *image = ImageSource::File(path.clone());
            }
            (target, 10, 100_000, 50_000)
        }
    };
    let mut c = SamplerConfig::new(target);
    c.levels = args.levels.unwrap_or(levels);
    c.iterations = args.iters.unwrap_or(iterations);
    c.burn_in = args.burnin.unwrap_or(if args.iters.is_some() { c.iterations / 2 } else { burn_in });
    c.seed = args.seed;
    c.thin = args.thin.unwrap_or(c.iterations);
    c.validate()?;
    Ok(c)
}

fn replicate_logged(config: &SamplerConfig, args: &ReproduceArgs) -> Result<ReplicationTable, Failure> {
    let start = Instant::now();
    let table = with_workers(args.workers, || replicate(config, args.replications, Execution::Parallel))?;
    info!(
        "{} x {} iterations ({}) in {:.1} s",
        args.replications,
        config.iterations,
        config.adaptation.label(),
        start.elapsed().as_secs_f64()
    );
    Ok(table)
}

fn cell(row: Option<&aptemper::sampler::EstimateRow>, undefined_std: bool) -> String {
    match row {
        Some(r) if undefined_std => format!("{:.3} (-)", r.mean),
        Some(r) => format!("{:.3} ({:.3})", r.mean, r.std),
        None => "-".into(),
    }
}

pub fn reproduce(args: ReproduceArgs) -> CmdResult {
    if args.replications == 0 {
        return Err(Failure::Usage("--replications must be at least 1".into()));
    }
    let base = protocol_config(&args)?;
    let modes: Vec<AdaptationMode> = args.adaptation.map_or(AdaptationMode::ALL.to_vec(), |m| vec![m]);
    prepare_dir(&args.out_dir)?;
    let name = match args.protocol {
        Protocol::Table1 => "table1",
        Protocol::Table2 => "table2",
        Protocol::Table3 => "table3",
        Protocol::Ising => "ising",
    };
    let mut text = String::new();
    match args.protocol {
        Protocol::Table1 | Protocol::Table2 => {
            let cols = ["E[X1]", "E[X2]", "E[X1^2]", "E[X2^2]"];
            let _ = write!(text, "{:<12}", "");
            for c in cols {
                let _ = write!(text, "{c:<18}");
            }
            text.push('\n');
            if let Some((m, m2)) = base.target.true_moments()? {
                let _ = write!(text, "{:<12}", "True value");
                for v in [m[0], m[1], m2[0], m2[1]] {
                    let _ = write!(text, "{:<18}", format!("{v:.3}"));
                }
                text.push('\n');
            }
            for mode in modes {
                let mut c = base.clone();
                c.adaptation = mode;
                let table = replicate_logged(&c, &args)?;
                let _ = write!(text, "{:<12}", mode.label());
                for col in cols {
                    let _ = write!(text, "{:<18}", cell(table.row(col), table.std_undefined));
                }
                text.push('\n');
                write_summary(create(&args.out_dir.join(format!("{name}_{mode}.csv")))?, &table.rows)?;
            }
        }
        Protocol::Table3 => {
            let mut lines: Vec<(u64, Vec<(f64, f64)>)> = Vec::new();
            for &n in &args.sizes {
                let mut c = base.clone().with_iterations(n);
                c.thin = n;
                if let Some(b) = args.burnin {
                    c.burn_in = b;
                }
                c.validate()?;
                let mut row = Vec::new();
                for &mode in &modes {
                    c.adaptation = mode;
                    let table = replicate_logged(&c, &args)?;
                    let rmse = |k: &str| table.row(k).and_then(|r| r.rmse).unwrap_or(f64::NAN);
                    row.push((rmse("E[X]"), rmse("E[X^2]")));
                    write_summary(create(&args.out_dir.join(format!("table3_{mode}_{n}.csv")))?, &table.rows)?;
                }
                lines.push((n, row));
            }
            for (title, pick) in [("RMSE of E[X]", 0usize), ("RMSE of E[X^2]", 1)] {
                let _ = writeln!(text, "{title}");
                let _ = write!(text, "{:<10}", "N");
                for m in &modes {
                    let _ = write!(text, "{:<12}", m.label());
                }
                text.push('\n');
                for (n, row) in &lines {
                    let _ = write!(text, "{n:<10}");
                    for v in row {
                        let x = if pick == 0 { v.0 } else { v.1 };
                        let _ = write!(text, "{:<12}", format!("{x:.3}"));
                    }
                    text.push('\n');
                }
            }
        }
        Protocol::Ising => {
            let (rows, cols) = image_shape(&base)?.expect("ising protocol has a lattice target");
            let table = replicate_logged(&base, &args)?;
            let count = table.summaries.len() as f64;
            let mut mean = vec![0.0; rows * cols];
            for s in &table.summaries {
                for (m, v) in mean.iter_mut().zip(&s.coord_mean) {
                    *m += v / count;
                }
            }
            write_pgm(create(&args.out_dir.join("posterior_mean.pgm"))?, rows, cols, &mean)?;
            write_summary(create(&args.out_dir.join("ising_swap.csv"))?, &table.rows)?;
            let _ = writeln!(text, "{:<10}swap acceptance", "pair");
            for r in &table.rows {
                let _ = writeln!(text, "{:<10}{}", r.estimator, cell(Some(r), table.std_undefined));
            }
        }
    }
    let _ = writeln!(text, "replications {}, base seed {}", args.replications, args.seed);
    fs::write(args.out_dir.join(format!("{name}.txt")), &text).map_err(runtime)?;
    print!("{text}");
    Ok(())
}

pub fn oracle(args: OracleArgs) -> CmdResult {
    if args.levels < 2 {
        return Err(Failure::Usage("--levels must be at least 2".into()));
    }
    if !(args.alpha_star > 0.0 && args.alpha_star < 1.0) {
        return Err(Failure::Usage("--alpha-star must lie in (0, 1)".into()));
    }
    if args.tol.is_nan() || args.tol <= 0.0 {
        return Err(Failure::Usage("--tol must be positive".into()));
    }
    let bounds = RhoBounds::new(args.rho_lo, args.rho_hi)?;
    let target = args.target.build();
    match fixed_point_rho(target.as_ref(), args.levels, args.alpha_star, bounds, args.tol) {
        Ok(fp) => {
            println!("target {}, L = {}, alpha* = {}", target.name(), args.levels, args.alpha_star);
            for (l, (rho, res)) in fp.rho.iter().zip(&fp.residuals).enumerate() {
                println!("rho[{}] = {rho:.10}  residual {res:.3e}", l + 1);
            }
            let betas: Vec<String> = fp.betas.iter().map(|b| format!("{b:.6e}")).collect();
            println!("beta = [{}]", betas.join(", "));
            Ok(())
        }
        Err(Error::NoInteriorRoot { level, low, high }) => {
            println!(
                "no interior root at level {level}: h - alpha* is {low:.3e} at rho_lo and {high:.3e} at rho_hi"
            );
            Ok(())
        }
        Err(e) => Err(runtime(e)),
    }
}
