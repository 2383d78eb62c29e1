//! Command-line surface for the betadyn library: expansions, admissible
//! words, cylinders, orbits, hitting analysis, exponent estimation,
//! dimension classification, and the Cantor constructions, with
//! machine-readable output for plots and golden-file tests.
//!
//! Rationals are rendered as `p/q` everywhere; decimals appear only
//! where `--digits` applies. Identical invocations produce byte-identical
//! output.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::One;
use serde_json::json;

use betadyn::cantor::{
    bernoulli_measure, boxcount_estimate, build_schedule, cover_csv,
    local_dimension_series, milestone_cover_points, verify_membership, CantorSchedule, WORD_CAP,
};
use betadyn::cylinders::{cylinder_interval, is_full, locate_cylinder, partition_csv};
use betadyn::dimension::{
    bl_dimension, classify_bounds, classify_uniform, covering_critical_exponent,
    inclusion_verdict, run_worked_examples, sw_dimension, BlOutcome, DimensionVerdict,
    VerdictKind,
};
use betadyn::error::BetaError;
use betadyn::exponents::{
    estimate_exponents, hitting_times, orbit, psi_exponents, run_decomposition, uniform_check,
    witness_stream, DigitStream, ExponentQuadruple, ExtRat, GapRule, PositionRule, SpeedFn,
    WitnessKind,
};
use betadyn::precision::{
    beta_from_str, parse_rational, BetaValue, Rat, RealScalar,
};
use betadyn::symbolic::{
    enumerate_admissible, eps_star_prefix, expansion_of_one, greedy_expand, is_admissible,
    solve_beta_n, DigitWord, Enumeration,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Parser)]
#[command(
    name = "betadyn",
    version,
    about = "Exact β-transformation toolkit: expansions, cylinders, exponents, dimensions",
    long_about = None
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Decimal places for endpoint rendering.
    #[arg(long, global = true, default_value_t = 30)]
    digits: u32,
}

#[derive(Args, Clone)]
struct BetaArg {
    /// Base spec: `dec:<digits>` or `poly:<c0,c1,...,cn>@[lo,hi]`.
    #[arg(long)]
    beta: String,
}

impl BetaArg {
    fn get(&self) -> Result<BetaValue, BetaError> {
        beta_from_str(&self.beta)
    }
}

#[derive(Args, Clone)]
struct ScheduleArgs {
    /// Asymptotic exponent target v.
    #[arg(long)]
    v: String,
    /// Uniform exponent target v̂.
    #[arg(long)]
    vhat: String,
    /// Slack δ added to both targets.
    #[arg(long, default_value = "0")]
    delta: String,
    /// Padding N (marker blocks 0^N 1 0^N; fillers from the truncation
    /// base β_N).
    #[arg(long, default_value_t = 8)]
    pad: u64,
    /// Number of schedule levels K.
    #[arg(long, default_value_t = 4)]
    levels: usize,
}

impl ScheduleArgs {
    fn build(&self) -> Result<CantorSchedule, BetaError> {
        build_schedule(
            &parse_rational(&self.v)?,
            &parse_rational(&self.vhat)?,
            &parse_rational(&self.delta)?,
            self.pad,
            self.levels,
        )
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Greedy β-expansion digits of x.
    Expand {
        #[command(flatten)]
        beta: BetaArg,
        /// Point in [0, 1), as a rational or decimal.
        #[arg(long)]
        x: String,
        #[arg(long)]
        n: usize,
    },
    /// The completed expansion of 1 (ε* prefix).
    EpsStar {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        n: usize,
    },
    /// Admissibility of a digit word.
    Admissible {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        word: String,
    },
    /// Enumerate or count admissible words of length n.
    Enumerate {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        count_only: bool,
    },
    /// The truncation base β_N.
    BetaN {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        n: usize,
    },
    /// Basic interval of an admissible word, or of the order-n word
    /// containing a point.
    Cylinder {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long, conflicts_with = "x")]
        word: Option<String>,
        /// Locate the cylinder containing this point (needs --n).
        #[arg(long, requires = "n")]
        x: Option<String>,
        /// Order of the located cylinder.
        #[arg(long)]
        n: Option<usize>,
    },
    /// All order-n cylinders as CSV.
    Partition {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        n: usize,
    },
    /// Exact orbit x, Tx, …
    Orbit {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        x: String,
        #[arg(long)]
        n: usize,
    },
    /// Hitting times T^n x < ψ(n).
    Hits {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        x: String,
        #[arg(long)]
        psi: String,
        #[arg(long)]
        horizon: usize,
    },
    /// Uniform window verdicts: some n ≤ N with T^n x < ψ(N).
    Uniform {
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        x: String,
        #[arg(long)]
        psi: String,
        #[arg(long, default_value_t = 0)]
        n_lo: usize,
        #[arg(long)]
        n_hi: usize,
    },
    /// Estimate (ν, ν̂) from a digit stream.
    Exponents {
        /// Stream spec: `periodic:<word>` | `scheduled:geom=<R>,gap=<c>` |
        /// `scheduled:geom=<R>,fullspan` | `scheduled:tower,gap=<c>` |
        /// `scheduled:chain=<R>,gap=<c>` | `psi-a:<a>,<blocks>` |
        /// `expansion:<x>` (needs --beta).
        #[arg(long)]
        stream: String,
        #[arg(long)]
        horizon: usize,
        #[arg(long)]
        beta: Option<String>,
    },
    /// liminf/limsup exponents of a speed function.
    PsiExp {
        #[arg(long)]
        psi: String,
        #[arg(long, default_value_t = 4096)]
        horizon: u64,
    },
    /// Classify the intersection set from a quadruple v1lo,v1hi,v2lo,v2hi.
    Classify {
        /// Four comma-separated entries, each a rational or `inf`.
        #[arg(long)]
        q: String,
    },
    /// Classify the uniform set from v̲₂, v̄₂.
    ClassifyUniform {
        #[arg(long)]
        v2lo: String,
        #[arg(long)]
        v2hi: String,
    },
    /// Two-exponent level-set dimension formula.
    Bl {
        #[arg(long)]
        v: String,
        #[arg(long)]
        vhat: String,
    },
    /// One-exponent shrinking-target dimension 1/(1+v).
    Sw {
        /// Rational or `inf`.
        #[arg(long)]
        v: String,
    },
    /// Critical exponent of the covering series.
    S0 {
        #[arg(long)]
        v: String,
        #[arg(long)]
        v2lo: String,
    },
    /// Whether the uniform set is contained in the asymptotic one.
    Inclusion {
        /// Four comma-separated entries, each a rational or `inf`.
        #[arg(long)]
        q: String,
    },
    /// Build a Cantor run schedule and print its bookkeeping.
    CantorSchedule {
        #[command(flatten)]
        sched: ScheduleArgs,
    },
    /// Generate template words with masses (CSV cover export).
    CantorGen {
        #[command(flatten)]
        sched: ScheduleArgs,
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        depth: u64,
        #[arg(long, default_value_t = WORD_CAP)]
        cap: u64,
    },
    /// Exact Bernoulli mass of a template word.
    CantorMeasure {
        #[command(flatten)]
        sched: ScheduleArgs,
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        word: String,
    },
    /// Local-dimension ratio series at the closing-marker milestones.
    Localdim {
        #[command(flatten)]
        sched: ScheduleArgs,
        #[command(flatten)]
        beta: BetaArg,
        /// Milestones 1..=k.
        #[arg(long)]
        k: usize,
    },
    /// Box-count regression over milestone scales.
    Boxcount {
        #[command(flatten)]
        sched: ScheduleArgs,
        #[command(flatten)]
        beta: BetaArg,
        /// Comma-separated milestone indices, e.g. 2,3,4,5.
        #[arg(long)]
        ks: String,
    },
    /// Certified membership checks on sampled deep endpoints.
    VerifyMembership {
        #[command(flatten)]
        sched: ScheduleArgs,
        #[command(flatten)]
        beta: BetaArg,
        #[arg(long)]
        psi1: String,
        #[arg(long)]
        psi2: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 17)]
        seed: u64,
    },
    /// Run the worked-example registry end to end.
    Examples,
}

fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn frac(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn parse_stream(spec: &str, beta: &Option<String>) -> Result<DigitStream, BetaError> {
    if let Some(word) = spec.strip_prefix("periodic:") {
        let w = DigitWord::parse(word)?;
        return witness_stream(WitnessKind::Periodic(w.0));
    }
    if let Some(rest) = spec.strip_prefix("scheduled:") {
        let mut position = None;
        let mut gap = None;
        for part in rest.split(',') {
            let part = part.trim();
            if let Some(r) = part.strip_prefix("geom=") {
                position = Some(PositionRule::Geometric(parse_rational(r)?));
            } else if part == "tower" {
                position = Some(PositionRule::Tower);
            } else if let Some(r) = part.strip_prefix("chain=") {
                position = Some(PositionRule::ChainedFromEnd(parse_rational(r)?));
            } else if let Some(c) = part.strip_prefix("gap=") {
                gap = Some(GapRule::Proportional(parse_rational(c)?));
            } else if part == "fullspan" {
                gap = Some(GapRule::FullSpan);
            } else {
                return Err(BetaError::Parse(format!("unknown schedule part {part:?}")));
            }
        }
        let position =
            position.ok_or_else(|| BetaError::Parse("missing position rule".into()))?;
        let gap = gap.ok_or_else(|| BetaError::Parse("missing gap rule".into()))?;
        return witness_stream(WitnessKind::Scheduled { position, gap });
    }
    if let Some(rest) = spec.strip_prefix("psi-a:") {
        let (a, blocks) = rest
            .split_once(',')
            .ok_or_else(|| BetaError::Parse("psi-a needs a,blocks".into()))?;
        return witness_stream(WitnessKind::PsiA {
            a: parse_rational(a)?,
            max_blocks: blocks
                .trim()
                .parse()
                .map_err(|_| BetaError::Parse("bad block count".into()))?,
        });
    }
    if let Some(x) = spec.strip_prefix("expansion:") {
        let beta = beta
            .as_ref()
            .ok_or_else(|| BetaError::Parse("expansion stream needs --beta".into()))?;
        let b = beta_from_str(beta)?;
        return Ok(DigitStream::from_expansion(
            RealScalar::from_rational(parse_rational(x)?),
            b,
        ));
    }
    Err(BetaError::Parse(format!("unknown stream spec {spec:?}")))
}

fn parse_quadruple(s: &str) -> Result<ExponentQuadruple, BetaError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(BetaError::Parse(
            "quadruple needs v1lo,v1hi,v2lo,v2hi".into(),
        ));
    }
    ExponentQuadruple::new(
        ExtRat::parse(parts[0])?,
        ExtRat::parse(parts[1])?,
        ExtRat::parse(parts[2])?,
        ExtRat::parse(parts[3])?,
    )
}

fn verdict_line(v: &DimensionVerdict) -> String {
    let kind = match v.kind {
        VerdictKind::Countable => "countable",
        VerdictKind::Empty => "empty",
        VerdictKind::FullDimension => "full_dimension",
        VerdictKind::Interval => "interval",
    };
    format!(
        "kind={kind} lower={} upper={} case={}",
        frac(&v.lower),
        frac(&v.upper),
        v.active_case
    )
}

fn run(cli: &Cli) -> Result<String, BetaError> {
    let digits = cli.digits;
    match &cli.cmd {
        Cmd::Expand { beta, x, n } => {
            let b = beta.get()?;
            let xv = RealScalar::from_rational(parse_rational(x)?);
            let w = greedy_expand(&xv, &b, *n)?;
            Ok(match cli.format {
                Format::Json => json!({"digits": w.text()}).to_string(),
                _ => w.text(),
            })
        }
        Cmd::EpsStar { beta, n } => {
            let b = beta.get()?;
            let e = eps_star_prefix(&b, *n)?;
            let (d1, status) = expansion_of_one(&b, *n)?;
            Ok(match cli.format {
                Format::Json => json!({
                    "eps_star": e.prefix.text(),
                    "d1": d1.text(),
                    "simple_parry": e.simple_parry,
                    "period": e.period.map(|(s, l)| json!([s, l])),
                })
                .to_string(),
                _ => format!(
                    "eps_star={} d1={} simple_parry={} ({:?})",
                    e.prefix.text(),
                    d1.text(),
                    e.simple_parry,
                    status
                ),
            })
        }
        Cmd::Admissible { beta, word } => {
            let b = beta.get()?;
            let w = DigitWord::parse(word)?;
            let ok = is_admissible(&w, &b)?;
            Ok(match cli.format {
                Format::Json => json!({"word": w.text(), "admissible": ok}).to_string(),
                _ => format!("{ok}"),
            })
        }
        Cmd::Enumerate { beta, n, count_only } => {
            let b = beta.get()?;
            match enumerate_admissible(&b, *n, *count_only)? {
                Enumeration::Count(c) => Ok(match cli.format {
                    Format::Json => json!({"n": n, "count": c.to_string()}).to_string(),
                    _ => c.to_string(),
                }),
                Enumeration::Words(words) => Ok(match cli.format {
                    Format::Json => json!({
                        "n": n,
                        "count": words.len(),
                        "words": words.iter().map(|w| w.text()).collect::<Vec<_>>(),
                    })
                    .to_string(),
                    _ => words
                        .iter()
                        .map(|w| w.text())
                        .collect::<Vec<_>>()
                        .join("\n"),
                }),
            }
        }
        Cmd::BetaN { beta, n } => {
            let b = beta.get()?;
            let bn = solve_beta_n(&b, *n)?;
            let poly = bn
                .poly()
                .map(|p| p.0.iter().map(|c| c.to_string()).collect::<Vec<_>>());
            let approx = bn.as_scalar().decimal_string(digits);
            Ok(match cli.format {
                Format::Json => json!({
                    "n": n,
                    "poly_coeffs_low_to_high": poly,
                    "approx": approx,
                })
                .to_string(),
                _ => match (poly, bn.as_rational()) {
                    (Some(p), _) => {
                        format!("beta_N ≈ {approx} (root of [{}], low to high)", p.join(", "))
                    }
                    (None, Some(r)) => format!("beta_N = {r} exactly"),
                    (None, None) => format!("beta_N ≈ {approx}"),
                },
            })
        }
        Cmd::Cylinder { beta, word, x, n } => {
            let b = beta.get()?;
            let c = match (word, x) {
                (_, Some(xs)) => {
                    let xv = RealScalar::from_rational(parse_rational(xs)?);
                    let order = n.ok_or_else(|| BetaError::Parse("--x needs --n".into()))?;
                    locate_cylinder(&xv, &b, order)?
                }
                (Some(w), None) => cylinder_interval(&DigitWord::parse(w)?, &b)?,
                (None, None) => {
                    return Err(BetaError::Parse("cylinder needs --word or --x".into()))
                }
            };
            let full = is_full(&c.word, &b)?;
            Ok(match cli.format {
                Format::Json => json!({
                    "word": c.word.text(),
                    "left": c.left.decimal_string(digits),
                    "right": c.right.decimal_string(digits),
                    "length": c.length().decimal_string(digits),
                    "is_full": full,
                })
                .to_string(),
                Format::Csv => format!(
                    "word,left,right,length,is_full\n{},{},{},{},{}",
                    c.word.text(),
                    c.left.decimal_string(digits),
                    c.right.decimal_string(digits),
                    c.length().decimal_string(digits),
                    full,
                ),
                Format::Table => format!(
                    "word={} left={} right={} length={} full={full}",
                    c.word.text(),
                    c.left.decimal_string(digits),
                    c.right.decimal_string(digits),
                    c.length().decimal_string(digits),
                ),
            })
        }
        Cmd::Partition { beta, n } => {
            let b = beta.get()?;
            Ok(partition_csv(&b, *n, digits)?.trim_end().to_string())
        }
        Cmd::Orbit { beta, x, n } => {
            let b = beta.get()?;
            let xv = RealScalar::from_rational(parse_rational(x)?);
            let (pts, zero) = orbit(&xv, &b, *n)?;
            let vals: Vec<String> = pts.iter().map(|p| p.decimal_string(digits)).collect();
            Ok(match cli.format {
                Format::Json => json!({"orbit": vals, "zero_hit_at": zero}).to_string(),
                _ => {
                    let mut s = vals.join("\n");
                    if let Some(z) = zero {
                        s.push_str(&format!("\nzero hit at step {z}"));
                    }
                    s
                }
            })
        }
        Cmd::Hits {
            beta,
            x,
            psi,
            horizon,
        } => {
            let b = beta.get()?;
            let xv = RealScalar::from_rational(parse_rational(x)?);
            let f = SpeedFn::parse(psi)?;
            let hits = hitting_times(&xv, &b, &f, *horizon)?;
            Ok(match cli.format {
                Format::Json => json!({"hits": hits}).to_string(),
                _ => hits
                    .iter()
                    .map(|h| h.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            })
        }
        Cmd::Uniform {
            beta,
            x,
            psi,
            n_lo,
            n_hi,
        } => {
            let b = beta.get()?;
            let xv = RealScalar::from_rational(parse_rational(x)?);
            let f = SpeedFn::parse(psi)?;
            let v = uniform_check(&xv, &b, &f, *n_lo, *n_hi)?;
            Ok(match cli.format {
                Format::Json => json!({
                    "windows": v.iter().map(|(n, ok)| json!([n, ok])).collect::<Vec<_>>()
                })
                .to_string(),
                _ => v
                    .iter()
                    .map(|(n, ok)| format!("{n},{ok}"))
                    .collect::<Vec<_>>()
                    .join("\n"),
            })
        }
        Cmd::Exponents {
            stream,
            horizon,
            beta,
        } => {
            let s = parse_stream(stream, beta)?;
            let rd = run_decomposition(&s, *horizon)?;
            let est = estimate_exponents(&s, *horizon)?;
            Ok(match cli.format {
                Format::Json => json!({
                    "nu": est.nu.text(),
                    "nu_hat": est.nu_hat.text(),
                    "horizon": est.horizon,
                    "runs": rd.runs.len(),
                    "selected": rd.selected.len(),
                    "nu_series": est.nu_series.iter().map(|(n, r)| json!([n, frac(r)])).collect::<Vec<_>>(),
                    "nu_hat_series": est.nu_hat_series.iter().map(|(n, r)| json!([n, frac(r)])).collect::<Vec<_>>(),
                })
                .to_string(),
                _ => format!(
                    "nu={} nu_hat={} (runs={}, selected={})",
                    est.nu.text(),
                    est.nu_hat.text(),
                    rd.runs.len(),
                    rd.selected.len()
                ),
            })
        }
        Cmd::PsiExp { psi, horizon } => {
            let f = SpeedFn::parse(psi)?;
            let e = psi_exponents(&f, *horizon);
            Ok(match cli.format {
                Format::Json => json!({
                    "lo": e.lo.text(),
                    "hi": e.hi.text(),
                    "exact": e.exact,
                })
                .to_string(),
                _ => format!("lo={} hi={} exact={}", e.lo.text(), e.hi.text(), e.exact),
            })
        }
        Cmd::Classify { q } => {
            let quad = parse_quadruple(q)?;
            let v = classify_bounds(&quad)?;
            Ok(match cli.format {
                Format::Json => serde_json::to_string(&v).expect("verdict serialises"),
                _ => verdict_line(&v),
            })
        }
        Cmd::ClassifyUniform { v2lo, v2hi } => {
            let v = classify_uniform(&ExtRat::parse(v2lo)?, &ExtRat::parse(v2hi)?)?;
            Ok(match cli.format {
                Format::Json => serde_json::to_string(&v).expect("verdict serialises"),
                _ => verdict_line(&v),
            })
        }
        Cmd::Bl { v, vhat } => {
            let out = bl_dimension(&parse_rational(v)?, &parse_rational(vhat)?)?;
            Ok(match out {
                BlOutcome::Empty => match cli.format {
                    Format::Json => json!({"empty": true}).to_string(),
                    _ => "empty".into(),
                },
                BlOutcome::Dimension(d) => match cli.format {
                    Format::Json => json!({"dimension": frac(&d)}).to_string(),
                    _ => frac(&d),
                },
            })
        }
        Cmd::Sw { v } => {
            let d = sw_dimension(&ExtRat::parse(v)?);
            Ok(match cli.format {
                Format::Json => json!({"dimension": frac(&d)}).to_string(),
                _ => frac(&d),
            })
        }
        Cmd::S0 { v, v2lo } => {
            let d = covering_critical_exponent(&parse_rational(v)?, &parse_rational(v2lo)?)?;
            Ok(match cli.format {
                Format::Json => json!({"s0": frac(&d)}).to_string(),
                _ => frac(&d),
            })
        }
        Cmd::Inclusion { q } => {
            let quad = parse_quadruple(q)?;
            let inc = inclusion_verdict(&quad);
            Ok(match cli.format {
                Format::Json => json!({"included": inc}).to_string(),
                _ => format!("{inc}"),
            })
        }
        Cmd::CantorSchedule { sched } => {
            let s = sched.build()?;
            let (r1, r2) = s.ratio_residuals();
            Ok(match cli.format {
                Format::Json => json!({
                    "n": s.n, "m": s.m, "t": s.t,
                    "l": s.l, "h": s.h, "p": s.p, "q": s.q,
                    "next_start": s.next_start,
                    "repairs": s.repairs,
                    "residual_v": frac(&r1),
                    "residual_vhat": frac(&r2),
                })
                .to_string(),
                _ => format!(
                    "n={:?}\nm={:?}\nt={:?}\nl={:?}\nh={:?}\np={:?}\nq={:?}\nnext_start={} repairs={}\nresiduals: v {} vhat {}",
                    s.n, s.m, s.t, s.l, s.h, s.p, s.q, s.next_start, s.repairs,
                    frac(&r1), frac(&r2)
                ),
            })
        }
        Cmd::CantorGen {
            sched,
            beta,
            depth,
            cap,
        } => {
            let s = sched.build()?;
            let b = beta.get()?;
            Ok(cover_csv(&s, &b, *depth, *cap, digits)?.trim_end().to_string())
        }
        Cmd::CantorMeasure { sched, beta, word } => {
            let s = sched.build()?;
            let b = beta.get()?;
            let w = DigitWord::parse(word)?;
            let m = bernoulli_measure(&s, &b, &w)?;
            Ok(match cli.format {
                Format::Json => json!({"mass": frac(&m)}).to_string(),
                _ => frac(&m),
            })
        }
        Cmd::Localdim { sched, beta, k } => {
            let s = sched.build()?;
            let b = beta.get()?;
            let series = local_dimension_series(&s, &b, *k)?;
            Ok(match cli.format {
                Format::Json => json!({
                    "series": series.iter().map(|(k, r)| json!([k, r])).collect::<Vec<_>>()
                })
                .to_string(),
                _ => series
                    .iter()
                    .map(|(k, r)| format!("{k},{r:.6}"))
                    .collect::<Vec<_>>()
                    .join("\n"),
            })
        }
        Cmd::Boxcount { sched, beta, ks } => {
            let s = sched.build()?;
            let b = beta.get()?;
            let ks: Vec<usize> = ks
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| BetaError::Parse(format!("bad milestone {t:?}")))
                })
                .collect::<Result<_, _>>()?;
            let pts = milestone_cover_points(&s, &b, &ks)?;
            let (slope, resid) = boxcount_estimate(&pts)?;
            Ok(match cli.format {
                Format::Json => json!({"slope": slope, "residual": resid}).to_string(),
                _ => format!("slope={slope:.6} residual={resid:.6}"),
            })
        }
        Cmd::VerifyMembership {
            sched,
            beta,
            psi1,
            psi2,
            samples,
            seed,
        } => {
            let s = sched.build()?;
            let b = beta.get()?;
            let f1 = SpeedFn::parse(psi1)?;
            let f2 = SpeedFn::parse(psi2)?;
            let report = verify_membership(&s, &b, &f1, &f2, *samples, *seed)?;
            Ok(match cli.format {
                Format::Json => json!({
                    "samples": report.samples,
                    "checked_milestones": report.checked_milestones,
                    "uniform_window": report.uniform_window.map(|(a, z)| json!([a, z])),
                    "hit_checks": report.hit_checks,
                    "window_checks": report.window_checks,
                    "exact_checks": report.exact_checks,
                    "violations": report.violations,
                    "passed": report.passed(),
                })
                .to_string(),
                _ => format!(
                    "samples={} milestones={:?} window={:?} hits={} windows={} exact={} violations={} passed={}",
                    report.samples,
                    report.checked_milestones,
                    report.uniform_window,
                    report.hit_checks,
                    report.window_checks,
                    report.exact_checks,
                    report.violations.len(),
                    report.passed()
                ),
            })
        }
        Cmd::Examples => {
            let rows = run_worked_examples()?;
            match cli.format {
                Format::Json => {
                    Ok(serde_json::to_string(&rows).expect("registry rows serialise"))
                }
                Format::Csv => {
                    let mut out =
                        String::from("id,v1lo,v1hi,v2lo,v2hi,lower,upper,case,dimension\n");
                    for r in &rows {
                        out.push_str(&format!(
                            "{},{},{},{},{},{},{},{},{}\n",
                            r.id,
                            r.quadruple[0],
                            r.quadruple[1],
                            r.quadruple[2],
                            r.quadruple[3],
                            frac(&r.verdict.lower),
                            frac(&r.verdict.upper),
                            r.verdict.active_case,
                            r.pinned,
                        ));
                    }
                    Ok(out.trim_end().to_string())
                }
                Format::Table => {
                    let mut out = String::from(
                        "id   quadruple (v1lo v1hi v2lo v2hi)   bounds [lower, upper]          dimension\n",
                    );
                    for r in &rows {
                        let dim = parse_rational(&r.pinned).expect("registry rational");
                        out.push_str(&format!(
                            "{:<4} {:<33} [{}, {}]{:<6} {}\n",
                            r.id,
                            r.quadruple.join(" "),
                            frac(&r.verdict.lower),
                            frac(&r.verdict.upper),
                            "",
                            fmt_rat(&dim),
                        ));
                        if let Some(note) = r.note {
                            out.push_str(&format!("     note: {note}\n"));
                        }
                    }
                    Ok(out.trim_end().to_string())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let (code, kind) = match &e {
                BetaError::PrecisionExhausted { .. } => (2u8, "precision_exhausted"),
                BetaError::RootNotIsolated(_) => (1, "root_not_isolated"),
                BetaError::NotGreaterThanOne(_) => (1, "not_greater_than_one"),
                BetaError::CapExceeded(_) => (1, "cap_exceeded"),
                BetaError::NotAdmissible(_) => (1, "not_admissible"),
                BetaError::DegenerateEquation(_) => (1, "degenerate_equation"),
                BetaError::NotFoundWithinBudget(_) => (1, "not_found_within_budget"),
                BetaError::InsufficientRuns(_) => (1, "insufficient_runs"),
                BetaError::InvalidParams(_) => (1, "invalid_params"),
                BetaError::InfeasibleTargets(_) => (1, "infeasible_targets"),
                BetaError::DegenerateSchedule(_) => (1, "degenerate_schedule"),
                BetaError::NotTemplateWord(_) => (1, "not_template_word"),
                BetaError::InsufficientScales(_) => (1, "insufficient_scales"),
                BetaError::DomainError(_) => (1, "domain_error"),
                BetaError::UnmatchedCase(_) => (1, "unmatched_case"),
                BetaError::Parse(_) => (1, "parse_error"),
            };
            eprintln!("{}", json!({"error": kind, "message": e.to_string()}));
            ExitCode::from(code)
        }
    }
}
