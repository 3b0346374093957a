use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pmelab::config::{list_presets, load_config, preset, RunConfig};
use pmelab::operators::dirichlet_energy;
use pmelab::scenario::{run_scenario, ScenarioOutcome, Status};
use pmelab::spectral::estimate_poincare;

/// Weighted porous-medium laboratory: runs scenarios and checks the decay,
/// contraction and positivity bounds along the discrete flow.
#[derive(Parser)]
#[command(name = "pmelab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more configuration files (concurrently, one directory each).
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Base output directory; results land in `<out>/<name>/`.
        #[arg(long, env = "PMELAB_OUT_DIR", default_value = "results")]
        out: PathBuf,
    },
    /// Run a built-in scenario.
    Preset {
        name: String,
        #[arg(long, env = "PMELAB_OUT_DIR", default_value = "results")]
        out: PathBuf,
        /// Print the preset's configuration instead of running it.
        #[arg(long)]
        print_config: bool,
    },
    /// List the built-in scenarios.
    ListPresets,
    /// Estimate the discrete Poincaré constant of a configuration's mesh and
    /// test the inequality on random zero-mean vectors.
    CheckPoincare {
        config: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { configs, out } => {
            let mut loaded = Vec::new();
            for path in &configs {
                match load_config(path) {
                    Ok(cfg) => loaded.push(cfg),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                }
            }
            run_batch(&loaded, &out)
        }
        Command::Preset {
            name,
            out,
            print_config,
        } => match preset(&name) {
            Some(p) if print_config => {
                print!("{}", p.toml.trim_start());
                ExitCode::SUCCESS
            }
            Some(p) => run_batch(&[p.config()], &out),
            None => {
                eprintln!("error: unknown preset `{name}` (see `pmelab list-presets`)");
                ExitCode::from(2)
            }
        },
        Command::ListPresets => {
            for p in list_presets() {
                println!("{:<20} {}", p.name, p.description);
            }
            ExitCode::SUCCESS
        }
        Command::CheckPoincare { config, samples } => match load_config(&config) {
            Ok(cfg) => check_poincare(&cfg, samples),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
    }
}

fn run_batch(configs: &[RunConfig], out: &Path) -> ExitCode {
    let results: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| scope.spawn(move || run_scenario(cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    });
    let mut ok = true;
    for (cfg, result) in configs.iter().zip(results) {
        match result {
            Ok(outcome) => {
                let dir = out.join(&cfg.name);
                if let Err(e) = outcome.write(&dir) {
                    eprintln!("error: writing {}: {e}", dir.display());
                    ok = false;
                    continue;
                }
                report(&outcome, &dir);
                ok &= outcome.passed();
            }
            Err(e) => {
                eprintln!("error: {}: {e}", cfg.name);
                ok = false;
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn report(outcome: &ScenarioOutcome, dir: &Path) {
    let cfg = &outcome.config;
    println!(
        "{}: {} steps, lambda = {}, results in {}",
        cfg.name,
        outcome.trajectory.steps,
        outcome.lambda.map_or("n/a".into(), |l| format!("{l:.6}")),
        dir.display()
    );
    if let Some(e) = &outcome.failure {
        println!("  run failed: {e}");
    }
    for r in &outcome.rows {
        let status = match r.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        print!(
            "  {status} {:<16} measured {:>12.4e}  bound {:>12.4e}  slack {:>12.4e}",
            r.check, r.measured, r.bound, r.slack
        );
        match &r.note {
            Some(n) => println!("  ({n})"),
            None => println!(),
        }
    }
}

fn check_poincare(cfg: &RunConfig, samples: usize) -> ExitCode {
    let mesh = match cfg.mesh() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let est = match estimate_poincare(&mesh) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let rayleigh = dirichlet_energy(&est.eigenvector, &mesh).unwrap_or(f64::NAN);
    println!(
        "{} (R = {}, n = {}): lambda = {:.12}, iterations = {}, residual = {:.3e}, rayleigh = {:.12}",
        cfg.potential.name(),
        cfg.half_width,
        cfg.cells,
        est.lambda,
        est.iterations,
        est.residual,
        rayleigh
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.checks.seed);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let mut u: Vec<f64> = (0..mesh.n_cells()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = mesh.integrate(&u);
        u.iter_mut().for_each(|x| *x -= mean);
        let var = mesh.integrate_with(&u, |x| x * x);
        let energy = dirichlet_energy(&u, &mesh).unwrap_or(f64::NAN);
        worst = worst.min(energy / var);
    }
    let ok = worst >= est.lambda - 1e-9 && est.residual <= 1e-9;
    println!(
        "{} smallest energy/variance over {samples} random vectors = {worst:.6e} (must be >= lambda)",
        if ok { "PASS" } else { "FAIL" }
    );
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
