//! Command-line front end: bounds, codes, counts and gap reports.
//!
//! Exit status is 0 on success, 2 for invalid input (including I/O
//! failures) and 3 when a Blahut-Arimoto point misses its gap tolerance.
//! In the last case the output is still written.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rabound::bench::emit::format_sig12;
use rabound::bench::gap::closed_form_bound;
use rabound::bench::{
    curve_csv, gap_report, load_pmf, load_sota, report_csv, to_bits_per_image, GapReport, Metric,
    Plot, RateUnit, SotaSeries,
};
use rabound::blahut_arimoto::RATE_GAP_TOLERANCE;
use rabound::{
    ba_curve, bits_per_pixel, block_fixed_rate, block_huffman_rate, classify_then_code_point,
    closed_form_curve, detection_config_count, fixed_length_rate, hamming_matrix, huffman_code,
    log2_of_count, BaCurve, DetectionModel, Error, Method, Pmf, RaCurve,
};

#[derive(Parser)]
#[command(
    name = "rabound",
    version,
    about = "Rate-accuracy bounds for discrete analysis tasks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace a rate-accuracy bound.
    #[command(subcommand)]
    Bound(BoundCommand),
    /// Rate of a concrete code, optionally paired with a classifier accuracy.
    #[command(subcommand)]
    Achieve(AchieveCommand),
    /// Count task output configurations.
    #[command(subcommand)]
    Count(CountCommand),
    /// Gap factors of a published series against a bound.
    Compare(CompareArgs),
    /// Draw a bound with published series as an SVG chart.
    Plot(PlotArgs),
}

#[derive(Subcommand)]
enum BoundCommand {
    /// Closed form for K equiprobable classes.
    ClosedForm(ClosedFormArgs),
    /// Blahut-Arimoto for a label histogram under Hamming distortion.
    Ba(BaArgs),
}

#[derive(Subcommand)]
enum AchieveCommand {
    /// Fixed-length code, ceil(log2 K) bits.
    Fixed(AchieveArgs),
    /// Huffman code of the label distribution, on blocks when --block-n > 1.
    Huffman(AchieveArgs),
    /// Fixed-length code on blocks of --block-n labels.
    Block(AchieveArgs),
}

#[derive(Subcommand)]
enum CountCommand {
    /// Object detection as classification over placements of labelled boxes.
    Detection(DetectionArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundKind {
    ClosedForm,
    Ba,
}

#[derive(Args)]
struct Output {
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to svg for `plot` and csv elsewhere.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Logarithmic rate axis in SVG output.
    #[arg(long)]
    log_x: bool,
}

#[derive(Args)]
struct ClosedFormArgs {
    #[arg(long)]
    classes: u64,
    #[arg(long, default_value_t = 101)]
    grid: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct Source {
    /// Histogram file of `label,count` lines.
    #[arg(long)]
    pmf: Option<PathBuf>,
    /// Equiprobable classes, when no histogram is given.
    #[arg(long)]
    classes: Option<u64>,
}

#[derive(Args)]
struct BaArgs {
    #[command(flatten)]
    source: Source,
    /// Curve points including both endpoints.
    #[arg(long, default_value_t = 64)]
    slopes: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct AchieveArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 1)]
    block_n: u32,
    /// Classifier accuracy to pair with the code rate.
    #[arg(long)]
    accuracy: Option<f64>,
    /// Write the codebook (Huffman only) here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DetectionArgs {
    #[arg(long, default_value_t = 98)]
    positions: u64,
    #[arg(long, default_value_t = 80)]
    obj_classes: u64,
    #[arg(long, default_value_t = 15)]
    max_objects: u64,
    #[arg(long, default_value_t = 640)]
    width: u64,
    #[arg(long, default_value_t = 480)]
    height: u64,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, value_enum, default_value = "closed-form")]
    bound: BoundKind,
    #[command(flatten)]
    source: Source,
    /// Grid of the closed-form bound.
    #[arg(long, default_value_t = 1001)]
    grid: usize,
    /// Curve points of the Blahut-Arimoto bound.
    #[arg(long, default_value_t = 64)]
    slopes: usize,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    sota: PathBuf,
    #[command(flatten)]
    bound: BoundArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct PlotArgs {
    /// Series to draw as markers; may be repeated.
    #[arg(long)]
    sota: Vec<PathBuf>,
    #[command(flatten)]
    bound: BoundArgs,
    #[command(flatten)]
    output: Output,
}

enum Failure {
    Invalid(String),
    NotConverged(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bound(BoundCommand::ClosedForm(a)) => bound_closed_form(a),
        Command::Bound(BoundCommand::Ba(a)) => bound_ba(a),
        Command::Achieve(AchieveCommand::Fixed(a)) => achieve(a, Method::Fixed),
        Command::Achieve(AchieveCommand::Huffman(a)) => achieve(a, Method::Huffman),
        Command::Achieve(AchieveCommand::Block(a)) => achieve(a, Method::BlockFixed),
        Command::Count(CountCommand::Detection(a)) => count_detection(a),
        Command::Compare(a) => compare(a),
        Command::Plot(a) => plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::NotConverged(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

fn write_out(out: &Option<PathBuf>, text: &str) -> CliResult {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| invalid(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

impl Source {
    fn load(&self) -> Result<Pmf, Failure> {
        match (&self.pmf, self.classes) {
            (Some(path), _) => read_pmf(path),
            (None, Some(k)) => Ok(Pmf::uniform(
                usize::try_from(k).map_err(|_| invalid("too many classes"))?,
            )?),
            (None, None) => Err(invalid("give --pmf FILE or --classes K")),
        }
    }

    fn num_classes(&self) -> Result<u64, Failure> {
        match (&self.pmf, self.classes) {
            (Some(path), _) => Ok(read_pmf(path)?.len() as u64),
            (None, Some(k)) => Ok(k),
            (None, None) => Err(invalid("give --pmf FILE or --classes K")),
        }
    }
}

impl Output {
    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

/// Loaders that name the file when it cannot be read at all.
fn read_pmf(path: &Path) -> Result<Pmf, Failure> {
    load_pmf(path).map_err(|e| with_path(path, e))
}

fn read_sota(path: &Path) -> Result<SotaSeries, Failure> {
    load_sota(path).map_err(|e| with_path(path, e))
}

fn with_path(path: &Path, e: Error) -> Failure {
    match e {
        Error::Io(_) | Error::Json(_) | Error::InvalidSeries(_) => {
            invalid(format!("{}: {e}", path.display()))
        }
        other => other.into(),
    }
}

fn emit_curve(curve: &RaCurve, title: &str, output: &Output) -> CliResult {
    let text = match output.format_or(Format::Csv) {
        Format::Csv => curve_csv(curve),
        Format::Svg => Plot::new(title)
            .log_x(output.log_x)
            .curve(title, curve)
            .render()?,
    };
    write_out(&output.out, &text)
}

fn bound_closed_form(a: ClosedFormArgs) -> CliResult {
    let curve = closed_form_curve(a.classes, a.grid)?;
    emit_curve(&curve, &format!("K = {} closed form", a.classes), &a.output)
}

fn check_converged(solved: &BaCurve) -> CliResult {
    let bad: Vec<_> = solved.non_converged().collect();
    if bad.is_empty() {
        return Ok(());
    }
    for s in &bad {
        eprintln!(
            "warning: slope {:.6}: gap {:.3e} bits after {} iterations",
            s.slope, s.gap, s.iterations
        );
    }
    Err(Failure::NotConverged(format!(
        "{} of {} points above the {RATE_GAP_TOLERANCE:e} bit gap tolerance; output written with upper-bound rates",
        bad.len(),
        solved.solutions.len()
    )))
}

fn solve_ba(source: &Source, points: usize) -> Result<(Pmf, BaCurve), Failure> {
    let pmf = source.load()?;
    let solved = ba_curve(&pmf, &hamming_matrix(pmf.len()), points)?;
    Ok((pmf, solved))
}

fn bound_ba(a: BaArgs) -> CliResult {
    let (pmf, solved) = solve_ba(&a.source, a.slopes)?;
    let title = format!("Blahut-Arimoto, K = {}", pmf.len());
    emit_curve(&solved.curve, &title, &a.output)?;
    check_converged(&solved)
}

fn achieve(a: AchieveArgs, method: Method) -> CliResult {
    let n = a.block_n;
    if n == 0 {
        return Err(invalid("--block-n must be >= 1"));
    }
    let k = a.source.num_classes()?;
    let (rate, method) = match method {
        Method::Fixed => {
            if n != 1 {
                return Err(invalid(
                    "fixed codes one label at a time; use `achieve block`",
                ));
            }
            (f64::from(fixed_length_rate(k)), Method::Fixed)
        }
        Method::Huffman => {
            let pmf = a.source.load()?;
            let book = huffman_code(&pmf)?;
            if let Some(path) = &a.out {
                if n != 1 {
                    return Err(invalid("codebook export is for --block-n 1"));
                }
                fs::write(path, book.to_text())
                    .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            }
            if n == 1 {
                let lengths: Vec<String> = book.lengths().iter().map(usize::to_string).collect();
                println!("lengths: {}", lengths.join(","));
                (book.avg_length, Method::Huffman)
            } else {
                (block_huffman_rate(&pmf, n)?, Method::BlockHuffman)
            }
        }
        _ => (block_fixed_rate(k, n)?, Method::BlockFixed),
    };
    println!("method: {}", method.as_str());
    println!("block_size: {n}");
    println!("rate_bits: {}", format_sig12(rate));
    if let Some(acc) = a.accuracy {
        let point = classify_then_code_point(acc, rate, method, n)?;
        let bound = closed_form_bound(k)?;
        let report = gap_report(
            &bound,
            &SotaSeries {
                dataset: format!("K = {k}"),
                method: method.as_str().into(),
                unit: RateUnit::BitsPerImage,
                resolution: None,
                metric: Metric::Accuracy,
                points: vec![rabound::bench::SotaPoint {
                    rate: point.rate,
                    accuracy: point.accuracy,
                }],
            },
        )?;
        println!("accuracy: {}", point.accuracy);
        print_entries(&report);
    }
    Ok(())
}

fn count_detection(a: DetectionArgs) -> CliResult {
    let model = DetectionModel::new(a.positions, a.obj_classes, a.max_objects)?;
    let count = detection_config_count(&model);
    let bits = log2_of_count(&count)?;
    println!("configurations: {count}");
    println!("scientific: {}", count.scientific(2));
    println!("log2: {bits:.6}");
    println!("published figure reading: ~150; exact: {bits:.6}");
    println!(
        "bits_per_pixel at {}x{}: {:.6e}",
        a.width,
        a.height,
        bits_per_pixel(bits, a.width, a.height)?
    );
    Ok(())
}

/// The bound curve, its legend name, and the sweep when it came from
/// Blahut-Arimoto.
fn build_bound(b: &BoundArgs) -> Result<(RaCurve, String, Option<BaCurve>), Failure> {
    match b.bound {
        BoundKind::ClosedForm => {
            let k = b.source.num_classes()?;
            Ok((
                closed_form_curve(k, b.grid)?,
                format!("K = {k} closed form"),
                None,
            ))
        }
        BoundKind::Ba => {
            let (pmf, solved) = solve_ba(&b.source, b.slopes)?;
            let name = format!("K = {} Blahut-Arimoto", pmf.len());
            Ok((solved.curve.clone(), name, Some(solved)))
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), |x| format!("{x:.6}"))
}

fn print_entries(report: &GapReport) {
    for e in &report.entries {
        println!(
            "point: rate_bits={:.6} accuracy={} bound_rate_bits={} gap_factor={}{}",
            e.sota_rate_bits,
            e.accuracy,
            fmt_opt(e.bound_rate_bits),
            fmt_opt(e.gap_factor),
            if e.clamped {
                " (accuracy above bound maximum, clamped)"
            } else {
                ""
            }
        );
        if let Some(g) = e.accuracy_gap {
            println!("  bound accuracy at this rate exceeds it by {g:.6}");
        }
    }
}

/// Detection series report mAP, which no accuracy bound speaks to. The
/// equiprobable configuration count still gives a sense of scale.
fn print_map_context(series: &SotaSeries) -> CliResult {
    let bits = log2_of_count(&detection_config_count(&DetectionModel::coco_yolo()))?;
    println!("metric is mAP: no gap factor is assigned, since mAP does not convert to classification accuracy");
    for p in &to_bits_per_image(series)?.points {
        let per_image = p.rate;
        println!(
            "context: {:.6} bits/image at mAP {} is {:.0}x the {bits:.2} bits/image of equiprobable \
             detection outputs (98 positions, 80 classes, up to 15 objects)",
            per_image,
            p.accuracy,
            per_image / bits
        );
    }
    Ok(())
}

fn compare(a: CompareArgs) -> CliResult {
    let series = read_sota(&a.sota)?;
    let (bound, name, solved) = build_bound(&a.bound)?;
    let report = gap_report(&bound, &series)?;
    println!("series: {} / {}", report.dataset, report.method);
    println!("bound: {name}");
    if report.metric == Metric::Map {
        print_map_context(&series)?;
    } else {
        print_entries(&report);
        if let Some(s) = report.summary {
            println!(
                "summary: min={:.6} max={:.6} geometric_mean={:.6}",
                s.min, s.max, s.geometric_mean
            );
        }
    }
    if a.output.out.is_some() {
        let text = match a.output.format_or(Format::Csv) {
            Format::Csv => report_csv(&report),
            Format::Svg => Plot::new(format!("{} vs {name}", series.method))
                .log_x(a.output.log_x)
                .curve(name.clone(), &bound)
                .series(&series)?
                .render()?,
        };
        write_out(&a.output.out, &text)?;
    }
    match solved {
        Some(s) => check_converged(&s),
        None => Ok(()),
    }
}

fn plot(a: PlotArgs) -> CliResult {
    let (bound, name, solved) = build_bound(&a.bound)?;
    let text = match a.output.format_or(Format::Svg) {
        Format::Csv => curve_csv(&bound),
        Format::Svg => {
            let mut plot = Plot::new(name.clone())
                .log_x(a.output.log_x)
                .curve(name, &bound);
            if solved.is_some() {
                // the equiprobable source is the worst case over all label distributions
                let k = a.bound.source.num_classes()?;
                plot = plot.curve(format!("K = {k} uniform"), &closed_form_bound(k)?);
            }
            for path in &a.sota {
                plot = plot.series(&read_sota(path)?)?;
            }
            plot.render()?
        }
    };
    write_out(&a.output.out, &text)?;
    match solved {
        Some(s) => check_converged(&s),
        None => Ok(()),
    }
}
