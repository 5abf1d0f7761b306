mod report;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use hupa_core::field::{load_field, rasterize_tessellation, BinaryField, FieldError, LoadOptions};
use hupa_core::generators::{GenerateError, GeneratorKind, GeneratorSpec, LatticeKind, RsaTarget};
use hupa_core::tessellation::{
    cell_statistics, delaunay, tessellation_to_text, triangle_statistics, triangulation_to_text, voronoi,
};
use hupa_core::variance::{analyze, AnalysisOptions, Sample};
use hupa_core::{BoxDomain, PointPattern, Seed};

use report::RunReport;

#[derive(Parser, Debug)]
#[command(name = "hupa", version, about = "Point-pattern order analysis on periodic boxes")]
struct Cli {
    /// Seed for every random choice of the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; output bytes do not depend on it.
    #[arg(long, global = true, env = "HUPA_THREADS", value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,
    /// Directory for relative output paths (created if missing).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Output file (generate) or output stem (other commands).
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<PathBuf>,
    /// Record wall-clock duration in the JSON report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated point pattern.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Number-variance (or dark-fraction variance) curve, fit and order class.
    Variance(VarianceArgs),
    /// Periodic Voronoi or Delaunay tessellation with cell statistics.
    Tessellate(TessellateArgs),
    /// Dark-fraction variance of a PBM/PGM image.
    Field(FieldArgs),
    /// SVG plate of a point pattern.
    Render(RenderArgs),
}

#[derive(Subcommand, Debug)]
enum GenerateKind {
    /// Homogeneous Poisson process.
    Poisson {
        #[arg(long = "box", value_parser = parse_box)]
        domain: BoxDomain,
        #[arg(long)]
        rho: f64,
    },
    /// Perfect lattice.
    Lattice {
        #[arg(long = "box", value_parser = parse_box)]
        domain: BoxDomain,
        #[arg(long, value_enum)]
        kind: LatticeArg,
        #[arg(long)]
        spacing: f64,
    },
    /// Square/cubic lattice with independent uniform jitter.
    Perturbed {
        #[arg(long = "box", value_parser = parse_box)]
        domain: BoxDomain,
        #[arg(long, default_value_t = 1.0)]
        spacing: f64,
        #[arg(long)]
        jitter: f64,
    },
    /// Random sequential addition of hard disks or spheres.
    #[command(group(ArgGroup::new("target").required(true).args(["count", "fraction"])))]
    Rsa {
        #[arg(long = "box", value_parser = parse_box)]
        domain: BoxDomain,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        fraction: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        max_attempts: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LatticeArg {
    Square,
    Triangular,
    Cubic,
}

impl From<LatticeArg> for LatticeKind {
    fn from(k: LatticeArg) -> Self {
        match k {
            LatticeArg::Square => LatticeKind::Square,
            LatticeArg::Triangular => LatticeKind::Triangular,
            LatticeArg::Cubic => LatticeKind::Cubic,
        }
    }
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Window radii, comma separated (default: 16 log-spaced radii).
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Windows per radius (default: 10000 in 2D, 4000 in 3D).
    #[arg(long)]
    windows: Option<usize>,
    /// Fit range `lo,hi` (default: the whole sweep).
    #[arg(long, value_delimiter = ',', num_args = 2)]
    fit_range: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct ImageArgs {
    /// Gray level at or below which a PGM pixel is dark.
    #[arg(long)]
    threshold: Option<u8>,
    /// Pixel edge length (overrides the sidecar).
    #[arg(long)]
    pixel_size: Option<f64>,
}

#[derive(Args, Debug)]
struct VarianceArgs {
    /// Pattern file, or a PBM/PGM image.
    input: PathBuf,
    #[command(flatten)]
    sweep: SweepArgs,
    #[command(flatten)]
    image: ImageArgs,
}

#[derive(Args, Debug)]
struct FieldArgs {
    /// PBM or PGM image.
    input: PathBuf,
    #[command(flatten)]
    sweep: SweepArgs,
    #[command(flatten)]
    image: ImageArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Rule {
    Voronoi,
    Delaunay,
}

#[derive(Args, Debug)]
struct TessellateArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Rule::Voronoi)]
    rule: Rule,
    /// Also write an SVG drawing.
    #[arg(long)]
    svg: bool,
    /// SVG pixels per model unit.
    #[arg(long, default_value_t = 20.0)]
    scale: f64,
    /// Also rasterize the cell walls to a PBM with this many columns.
    #[arg(long)]
    raster: Option<usize>,
    /// Wall half-width for --raster.
    #[arg(long, default_value_t = 0.05)]
    wall: f64,
}

#[derive(Args, Debug)]
struct RenderArgs {
    input: PathBuf,
    /// Pixels per model unit.
    #[arg(long, default_value_t = 20.0)]
    scale: f64,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn parse_box(s: &str) -> Result<BoxDomain, String> {
    let lengths = s
        .split('x')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad box length {t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    BoxDomain::new(&lengths).map_err(|e| e.to_string())
}

struct Run<'a> {
    cli: &'a Cli,
    report: RunReport,
}

impl Run<'_> {
    fn path(&self, default_name: &str, ext: Option<&str>) -> PathBuf {
        let base = match (&self.cli.output, ext) {
            (Some(o), Some(ext)) => {
                let mut s = o.clone().into_os_string();
                s.push(".");
                s.push(ext);
                PathBuf::from(s)
            }
            (Some(o), None) => o.clone(),
            (None, Some(ext)) => PathBuf::from(format!("{default_name}.{ext}")),
            (None, None) => PathBuf::from(default_name),
        };
        match &self.cli.out_dir {
            Some(dir) if base.is_relative() => dir.join(base),
            _ => base,
        }
    }

    fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| runtime(format!("{}: {e}", parent.display())))?;
        }
        std::fs::write(path, bytes).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
        self.report.add_output(path, bytes);
        Ok(())
    }

    fn read_input(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = std::fs::read(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
        self.report.add_input(path, &bytes);
        Ok(bytes)
    }

    fn finish_report(mut self, stem: &str, started: Instant) -> Result<(), CliError> {
        if self.cli.timing {
            self.report.duration_seconds = Some(started.elapsed().as_secs_f64());
        }
        let path = self.path(stem, Some("json"));
        let text = self.report.to_json();
        self.write(&path, text.as_bytes())?;
        println!("{}", path.display());
        Ok(())
    }
}

fn input_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into())
}

fn is_pnm(bytes: &[u8]) -> bool {
    bytes.len() >= 2 && bytes[0] == b'P' && matches!(bytes[1], b'1' | b'2' | b'4' | b'5')
}

fn read_pattern(run: &mut Run, path: &Path) -> Result<PointPattern, CliError> {
    let bytes = run.read_input(path)?;
    let text = String::from_utf8(bytes).map_err(|_| runtime(format!("{}: not UTF-8 text", path.display())))?;
    PointPattern::parse(&text).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn read_field(run: &mut Run, path: &Path, image: &ImageArgs) -> Result<BinaryField, CliError> {
    run.read_input(path)?;
    let options = LoadOptions {
        threshold: image.threshold,
        pixel_size: image.pixel_size,
    };
    let field = load_field(path, options).map_err(|e| match e {
        FieldError::MissingThreshold => CliError::Usage(format!("{}: {e} (pass --threshold)", path.display())),
        e => runtime(format!("{}: {e}", path.display())),
    })?;
    run.report.param("threshold", json!(image.threshold));
    run.report.param("pixel_size", json!(field.pixel_size()));
    run.report.param("pixels", json!([field.width(), field.height()]));
    if !field.is_periodic() {
        run.report
            .note("field has no periodicity assertion; windows wrap across the image edges");
    }
    Ok(field)
}

fn cmd_generate(run: &mut Run, kind: &GenerateKind) -> Result<(), CliError> {
    let seed = Seed(run.cli.seed);
    let (name, spec) = match kind {
        GenerateKind::Poisson { domain, rho } => (
            "poisson",
            GeneratorSpec::new(GeneratorKind::Poisson { intensity: *rho }, domain.clone()),
        ),
        GenerateKind::Lattice { domain, kind, spacing } => (
            "lattice",
            GeneratorSpec::new(
                GeneratorKind::Lattice {
                    lattice: (*kind).into(),
                    spacing: *spacing,
                },
                domain.clone(),
            ),
        ),
        GenerateKind::Perturbed { domain, spacing, jitter } => (
            "perturbed",
            GeneratorSpec::new(
                GeneratorKind::PerturbedLattice {
                    spacing: *spacing,
                    jitter: *jitter,
                },
                domain.clone(),
            ),
        ),
        GenerateKind::Rsa {
            domain,
            radius,
            count,
            fraction,
            max_attempts,
        } => {
            let target = match (count, fraction) {
                (Some(n), _) => RsaTarget::Count(*n),
                (None, Some(phi)) => RsaTarget::Fraction(*phi),
                (None, None) => unreachable!("clap enforces the target group"),
            };
            (
                "rsa",
                GeneratorSpec::new(
                    GeneratorKind::RsaPacking {
                        hard_radius: *radius,
                        target,
                        max_attempts: *max_attempts,
                    },
                    domain.clone(),
                ),
            )
        }
    };
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let pattern = spec.generate(seed).map_err(|e| match e {
        GenerateError::InvalidParameter(_) | GenerateError::Incommensurate { .. } => CliError::Usage(e.to_string()),
        e => runtime(e),
    })?;
    let path = run.path(&format!("{name}.pat"), None);
    run.write(&path, pattern.to_text().as_bytes())?;
    println!("{}", path.display());
    Ok(())
}

fn sweep_options(sweep: &SweepArgs, sample: Sample<'_>) -> Result<AnalysisOptions, CliError> {
    let radii = match &sweep.radii {
        Some(r) => r.clone(),
        None => sample.default_radii().map_err(runtime)?,
    };
    let fit_range = match &sweep.fit_range {
        Some(v) => (v[0], v[1]),
        None => (radii[0], radii[radii.len() - 1]),
    };
    Ok(AnalysisOptions {
        n_windows: Some(sweep.windows.unwrap_or_else(|| sample.default_windows())),
        radii: Some(radii),
        fit_range: Some(fit_range),
    })
}

fn run_analysis(run: &mut Run, sample: Sample<'_>, sweep: &SweepArgs, stem: &str) -> Result<(), CliError> {
    let options = sweep_options(sweep, sample)?;
    run.report.param("radii", json!(options.radii));
    run.report.param("windows", json!(options.n_windows));
    run.report.param("fit_range", json!(options.fit_range));
    run.report.param("mode", json!(sample.mode().as_str()));
    run.report.param("window_centers", json!("uniform, drawn once and shared by all radii"));
    let analysis = analyze(sample, &options, Seed(run.cli.seed)).map_err(runtime)?;
    let csv = analysis.curve.to_csv();
    let csv_path = run.path(stem, Some("csv"));
    run.write(&csv_path, csv.as_bytes())?;
    run.report.curve = Some(analysis.curve);
    run.report.fit = Some(analysis.fit);
    run.report.class = Some(analysis.class);
    Ok(())
}

fn cmd_variance(run: &mut Run, args: &VarianceArgs) -> Result<String, CliError> {
    let stem = format!("{}-variance", input_stem(&args.input));
    let head = std::fs::read(&args.input).map_err(|e| runtime(format!("{}: {e}", args.input.display())))?;
    run.report.param("input", json!(args.input.display().to_string()));
    if is_pnm(&head) {
        let field = read_field(run, &args.input, &args.image)?;
        run.report.set_domain(field.domain());
        run_analysis(run, Sample::Field(&field), &args.sweep, &stem)?;
    } else {
        let pattern = read_pattern(run, &args.input)?;
        run.report.set_domain(pattern.domain());
        run.report.param("points", json!(pattern.len()));
        run_analysis(run, Sample::Pattern(&pattern), &args.sweep, &stem)?;
    }
    Ok(stem)
}

fn cmd_field(run: &mut Run, args: &FieldArgs) -> Result<String, CliError> {
    run.report.param("input", json!(args.input.display().to_string()));
    let field = read_field(run, &args.input, &args.image)?;
    run.report.set_domain(field.domain());
    let stem = format!("{}-field", input_stem(&args.input));
    run_analysis(run, Sample::Field(&field), &args.sweep, &stem)?;
    Ok(stem)
}

fn cmd_tessellate(run: &mut Run, args: &TessellateArgs) -> Result<String, CliError> {
    let pattern = read_pattern(run, &args.input)?;
    run.report.set_domain(pattern.domain());
    run.report.param("input", json!(args.input.display().to_string()));
    run.report.param("points", json!(pattern.len()));
    let rule = match args.rule {
        Rule::Voronoi => "voronoi",
        Rule::Delaunay => "delaunay",
    };
    run.report.param("rule", json!(rule));
    let stem = format!("{}-{rule}", input_stem(&args.input));
    run.report.param("svg", json!(args.svg));
    if args.svg {
        run.report.param("scale", json!(args.scale));
    }
    if let Some(n) = args.raster {
        run.report.param("raster_pixels", json!(n));
        run.report.param("wall_halfwidth", json!(args.wall));
    }
    let (text, stats, drawing, tess) = match args.rule {
        Rule::Voronoi => {
            let tess = voronoi(&pattern).map_err(runtime)?;
            let drawing = args.svg.then(|| svg::tessellation(&tess, args.scale));
            (tessellation_to_text(&tess), cell_statistics(&tess), drawing, Some(tess))
        }
        Rule::Delaunay => {
            let tri = delaunay(&pattern).map_err(runtime)?;
            let drawing = args.svg.then(|| svg::triangulation(&tri, args.scale));
            (triangulation_to_text(&tri), triangle_statistics(&tri), drawing, None)
        }
    };
    let path = run.path(&stem, Some("tess"));
    run.write(&path, text.as_bytes())?;
    if let Some(d) = drawing {
        let path = run.path(&stem, Some("svg"));
        run.write(&path, d.as_bytes())?;
    }
    if let Some(n) = args.raster {
        let tess = match tess {
            Some(t) => t,
            None => voronoi(&pattern).map_err(runtime)?,
        };
        let field = rasterize_tessellation(&tess, n, args.wall).map_err(|e| CliError::Usage(e.to_string()))?;
        let path = run.path(&stem, Some("pbm"));
        run.write(&path, &field.to_pbm())?;
    }
    run.report.cell_stats = Some(stats);
    Ok(stem)
}

fn cmd_render(run: &mut Run, args: &RenderArgs) -> Result<(), CliError> {
    let stem = input_stem(&args.input);
    let pattern = read_pattern(run, &args.input)?;
    if !(args.scale > 0.0 && args.scale.is_finite()) {
        return Err(CliError::Usage(format!("--scale must be positive, got {}", args.scale)));
    }
    if pattern.dim() != 2 {
        return Err(runtime(format!("render needs a 2D pattern, got {}D", pattern.dim())));
    }
    let path = run.path(&stem, Some("svg"));
    run.write(&path, svg::pattern(&pattern, args.scale).as_bytes())?;
    println!("{}", path.display());
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let name = match &cli.command {
        Command::Generate { .. } => "generate",
        Command::Variance(_) => "variance",
        Command::Tessellate(_) => "tessellate",
        Command::Field(_) => "field",
        Command::Render(_) => "render",
    };
    let mut run = Run {
        cli,
        report: RunReport::new(name, cli.seed),
    };
    let stem = match &cli.command {
        Command::Generate { kind } => return cmd_generate(&mut run, kind),
        Command::Render(args) => return cmd_render(&mut run, args),
        Command::Variance(args) => cmd_variance(&mut run, args)?,
        Command::Field(args) => cmd_field(&mut run, args)?,
        Command::Tessellate(args) => cmd_tessellate(&mut run, args)?,
    };
    run.finish_report(&stem, started)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let started = Instant::now();
    let threads = cli.threads.map(|t| t as usize);
    let result = hupa_core::exec::with_threads(threads, || execute(&cli));
    match result {
        Ok(()) => {
            eprintln!("done in {:.3} s", started.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let (CliError::Usage(m) | CliError::Runtime(m)) = &e;
            eprintln!("error: {m}");
            ExitCode::from(e.code())
        }
    }
}
