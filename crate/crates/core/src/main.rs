use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use hfbem::analytic::{CircleSeriesSpec, circle_density_on_boundary};
use hfbem::experiments::{
    GeometrySpec, Method, MethodParams, SweepConfig, boundary_layer_diagnostic, build_basis,
    run_sweep, write_density_csv,
};
use hfbem::galerkin::{GalerkinOptions, galerkin_solve, reconstruct, relative_l2_error};
use hfbem::geometry::{IncidentWave, Vec2, shadow_geometry};
use hfbem::kernels::DoubleLayerSplit;
use hfbem::nystrom::{DEFAULT_PPW, GridOptions, assemble, build_grid};

#[derive(Parser)]
#[command(
    name = "hfbem",
    version,
    about = "High-frequency sound-hard scattering by smooth convex obstacles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Degree/wavenumber error sweep driven by a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Permit wavenumbers above 400.
        #[arg(long)]
        allow_large: bool,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analytic reference solutions.
    Oracle {
        #[command(subcommand)]
        which: Oracle,
    },
    /// Diagnostics of the computed densities.
    Diag {
        #[command(subcommand)]
        which: Diag,
    },
    /// Nyström solve, and optionally a Galerkin solve, for one wavenumber.
    Solve(SolveArgs),
}

#[derive(Subcommand)]
enum Oracle {
    /// Series solution on the unit-speed circle grid.
    Circle {
        #[arg(long)]
        k: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = DEFAULT_PPW)]
        ppw: f64,
    },
}

#[derive(Subcommand)]
enum Diag {
    /// Shadow-boundary layer width at k and 8k.
    Layer {
        #[arg(long)]
        k: f64,
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long, default_value_t = DEFAULT_PPW)]
        ppw: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GeometryKind {
    Circle,
    Ellipse,
}

#[derive(clap::Args)]
struct GeometryArgs {
    #[arg(long, value_enum, default_value = "circle")]
    geometry: GeometryKind,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 1.5)]
    semi_a: f64,
    #[arg(long, default_value_t = 0.5)]
    semi_b: f64,
    #[arg(long, default_value_t = std::f64::consts::PI / 6.0)]
    rotation: f64,
    /// Incidence direction `ax,ay`.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [1.0, 0.0])]
    incidence: Vec<f64>,
}

impl GeometryArgs {
    fn spec(&self) -> GeometrySpec {
        match self.geometry {
            GeometryKind::Circle => GeometrySpec::Circle {
                radius: self.radius,
            },
            GeometryKind::Ellipse => GeometrySpec::Ellipse {
                semi_a: self.semi_a,
                semi_b: self.semi_b,
                rotation: self.rotation,
            },
        }
    }

    fn alpha(&self) -> Vec2 {
        Vec2::new(self.incidence[0], self.incidence[1])
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    FreqAdapted,
    Cov,
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long)]
    k: f64,
    #[command(flatten)]
    geometry: GeometryArgs,
    #[arg(long, default_value_t = DEFAULT_PPW)]
    ppw: f64,
    #[arg(long)]
    allow_large: bool,
    /// CSV of `t, Re η, Im η, Re η^slow, Im η^slow`.
    #[arg(long)]
    dump_density: Option<PathBuf>,
    /// Galerkin space; required for `--dump-galerkin`.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long, default_value_t = 8)]
    degree: usize,
    /// CSV of `t, Re η̂, Im η̂`, the region label and its coefficient norm.
    #[arg(long)]
    dump_galerkin: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> hfbem::Result<ExitCode> {
    match cli.command {
        Command::Sweep {
            config,
            allow_large,
            out,
        } => {
            let mut cfg = SweepConfig::load(&config)?;
            cfg.allow_large |= allow_large;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let outcome = run_sweep(&cfg)?;
            println!(
                "{:>8} {:>4} {:>13} {:>5} {:>12} {:>10}",
                "k", "d", "method", "dim", "rel_l2", "cond"
            );
            for r in &outcome.records {
                println!(
                    "{:>8} {:>4} {:>13} {:>5} {:>12.4e} {:>10.2e}",
                    r.k,
                    r.d,
                    r.method.to_string(),
                    r.dim,
                    r.rel_l2_error,
                    r.condition
                );
            }
            for f in &outcome.failures {
                eprintln!(
                    "failed: k = {}, {}, d = {}: {}",
                    f.k, f.method, f.d, f.message
                );
            }
            println!("outputs in {}", cfg.output_dir.display());
            Ok(if outcome.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Oracle {
            which:
                Oracle::Circle {
                    k,
                    out,
                    radius,
                    ppw,
                },
        } => {
            let base = GeometrySpec::Circle { radius }.build()?;
            let alpha = Vec2::new(1.0, 0.0);
            let wave = IncidentWave::new(alpha, k)?;
            let grid = build_grid(&base, k, &GridOptions::with_ppw(ppw))?;
            let spec = CircleSeriesSpec::new(radius, k)?;
            let eta = circle_density_on_boundary(&spec, &base, &grid, alpha)?;
            write_density_csv(&out, &eta, &base, &wave)?;
            println!("wrote {} nodes to {}", grid.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Diag {
            which: Diag::Layer { k, geometry, ppw },
        } => {
            let curve = geometry.spec().build()?;
            let wave = IncidentWave::new(geometry.alpha(), k)?;
            let opts = GridOptions {
                allow_large: true,
                ..GridOptions::with_ppw(ppw)
            };
            let r = boundary_layer_diagnostic(&curve, &wave, &opts)?;
            println!(
                "k = {}: width {:.6} (peak at t1{:+.4})",
                r.k, r.width.width, r.width.peak_offset
            );
            println!(
                "k = {}: width {:.6} (peak at t1{:+.4})",
                r.k_other, r.width_other.width, r.width_other.peak_offset
            );
            println!("ratio {:.4} (k^-1/3 law: 2)", r.ratio);
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve(args) => solve(args),
    }
}

fn solve(args: SolveArgs) -> hfbem::Result<ExitCode> {
    let base = args.geometry.spec().build()?;
    let (shadow, curve) = shadow_geometry(&base, args.geometry.alpha())?;
    let wave = IncidentWave::new(args.geometry.alpha(), args.k)?;
    let opts = GridOptions {
        allow_large: args.allow_large,
        ..GridOptions::with_ppw(args.ppw)
    };
    let grid = build_grid(&curve, args.k, &opts)?;
    let split = DoubleLayerSplit::new(&curve, args.k)?;
    let nys = assemble(&curve, &wave, &grid, &split)?;
    let (eta, report) = nys.solve()?;
    println!(
        "n = {}, residual {:.3e}, pivot ratio {:.3e}, t1 = {:.6}, t2 = {:.6}",
        grid.len(),
        report.residual,
        report.pivot_ratio,
        shadow.t1,
        shadow.t2
    );
    if let Some(path) = &args.dump_density {
        write_density_csv(path, &eta, &curve, &wave)?;
    }
    let Some(method) = args.method else {
        if args.dump_galerkin.is_some() {
            return Err(hfbem::Error::InvalidArgument(
                "--dump-galerkin needs --method".into(),
            ));
        }
        return Ok(ExitCode::SUCCESS);
    };
    let method = match method {
        MethodArg::FreqAdapted => Method::FreqAdapted,
        MethodArg::Cov => Method::Cov,
    };
    let basis = build_basis(
        method,
        &MethodParams::default(),
        &shadow,
        &curve,
        &wave,
        args.degree,
    )?;
    let sol = galerkin_solve(&basis, &nys, &GalerkinOptions::default())?;
    let approx = reconstruct(&sol, &grid)?;
    println!(
        "{method} d = {}: dim {}, condition {:.3e}, distance to Nyström {:.3e}{}",
        args.degree,
        basis.dimension(),
        sol.condition,
        relative_l2_error(&approx, &eta)?,
        if sol.ill_conditioned {
            " (least squares)"
        } else {
            ""
        }
    );
    if let Some(path) = &args.dump_galerkin {
        let part = basis.partition();
        let norms: Vec<f64> = (0..part.len())
            .map(|j| {
                let off = basis.offset(j);
                sol.coefficients[off..off + basis.degrees()[j] + 1]
                    .iter()
                    .map(Complex64::norm_sqr)
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let mut out = String::from("t,re_eta_hat,im_eta_hat,region,coefficient_norm\n");
        for j in 0..grid.len() {
            let t = grid.node(j);
            let (r, _) = part.locate(t);
            let v = approx.values[j];
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{},{:.16e}\n",
                t,
                v.re,
                v.im,
                part.regions()[r].label,
                norms[r]
            ));
        }
        std::fs::write(path, out)?;
    }
    Ok(ExitCode::SUCCESS)
}
