//! Command-line front end for `cubic-aux`.
//!
//! Every subcommand reads forms from a form file, runs one operation and
//! writes either CSV (tabular results) or a JSON document tagged with
//! `"schema": 1`. Output depends only on the arguments and the seed, never
//! on the worker count.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use cubic_aux::circle::{
    convergence_report, count_zeros_box, singular_integral_estimate, singular_series_estimate, Depth,
    DiagonalSystem, ReportParams, DEFAULT_EPSILON,
};
use cubic_aux::counting::{
    class_histogram, classify_dyadic, count_aux, count_aux_by_class, count_aux_eq, count_nh, ellipsoid_bound,
    partition_check, pigeonhole, trichotomy, DyadicClass, Strictness, TrichotomyParams,
};
use cubic_aux::davenport::{
    dichotomy, sigma_diagonal, singular_candidates, trilinear_bound_check, verify_hy_identity, Dichotomy,
    DichotomyParams,
};
use cubic_aux::formfile::{self, FormFile};
use cubic_aux::minors::{cauchy_binet, minor_sv_bounds, minors_jacobian, minors_vector, singular_values};
use cubic_aux::{Backend, CubicForm, Matrix, Rational, Scalar, SymMatrix};

pub const SCHEMA: u32 = 1;
pub const THREADS_ENV: &str = "CUBIC_AUX_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] cubic_aux::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) | CliError::Io(_) => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "cubic-aux", version, about = "Auxiliary counting problems for systems of cubic forms")]
pub struct Cli {
    /// Worker threads; defaults to $CUBIC_AUX_THREADS, then the core count
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output format; tabular commands default to csv, the rest to json
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the result here instead of stdout
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Override the backend named in the form file
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendArg>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Exact,
    Float,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluation, norms and Hessians of single forms
    #[command(subcommand)]
    Form(FormCmd),
    /// Compound matrices and minors of Hessians
    #[command(subcommand)]
    Minors(MinorsCmd),
    /// Counts for the auxiliary inequality |H_c(x) y| < B and its classes
    #[command(subcommand)]
    Count(CountCmd),
    /// The y-vector construction, its identity and the subspace dichotomy
    #[command(subcommand)]
    Davenport(DavenportCmd),
    /// Zero counts of diagonal systems and their Hardy-Littlewood prediction
    #[command(subcommand)]
    Circle(CircleCmd),
}

#[derive(Debug, Args)]
pub struct FormArg {
    /// Form file
    #[arg(long)]
    pub form: PathBuf,
    /// Which form of the file to use (1-based)
    #[arg(long, default_value_t = 1)]
    pub index: usize,
}

#[derive(Debug, Args)]
pub struct StrictArg {
    /// Use `<= B` instead of the default `< B`
    #[arg(long, conflicts_with = "strict")]
    pub weak: bool,
    /// Use `< B` (the default)
    #[arg(long)]
    pub strict: bool,
}

impl StrictArg {
    fn get(&self) -> Strictness {
        if self.weak {
            Strictness::Weak
        } else {
            Strictness::Strict
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum FormCmd {
    /// Dimension, norm ||c|| = max|d^3 c| / 6 and the canonical coefficients
    Info {
        #[command(flatten)]
        form: FormArg,
    },
    /// c(x)
    Eval {
        #[command(flatten)]
        form: FormArg,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<String>,
    },
    /// The normalised Hessian H_c(x) and its singular values
    Hessian {
        #[command(flatten)]
        form: FormArg,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum MinorsCmd {
    /// All k x k minors of H_c(x) in lexicographic tuple order
    Vector {
        #[command(flatten)]
        form: FormArg,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<String>,
        #[arg(long)]
        k: usize,
    },
    /// Jacobian of the k x k minors of H_c(x) with respect to x
    Jacobian {
        #[command(flatten)]
        form: FormArg,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<String>,
        #[arg(long)]
        k: usize,
    },
    /// Both sqrt-binomial bounds between the largest k-minor and Lambda_1..Lambda_k
    Bounds {
        #[command(flatten)]
        form: FormArg,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<String>,
        #[arg(long)]
        k: usize,
    },
    /// Checks that the k-th compound of LM is the product of the compounds
    CauchyBinet {
        /// Rows separated by `;`, entries by `,`
        #[arg(long, allow_hyphen_values = true)]
        left: String,
        #[arg(long, allow_hyphen_values = true)]
        right: String,
        #[arg(long)]
        k: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum CountCmd {
    /// N^aux(B): pairs (x, y) in [-B, B]^2n with |H_c(x) y| below B
    Aux {
        #[command(flatten)]
        form: FormArg,
        #[arg(long = "B")]
        b: i64,
        #[command(flatten)]
        strict: StrictArg,
        /// Count H_c(x) y = 0 instead
        #[arg(long)]
        eq: bool,
        /// One row per dyadic eigenvalue class
        #[arg(long)]
        by_class: bool,
    },
    /// N_H(B) for one symmetric matrix, with the ellipsoid bound
    Nh {
        /// Rows separated by `;`, entries by `,`
        #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["form", "x"])]
        matrix: Option<String>,
        /// Use H_c(x) from this form file
        #[arg(long, requires = "x")]
        form: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        index: usize,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<String>>,
        #[arg(long = "B")]
        b: i64,
        #[command(flatten)]
        strict: StrictArg,
    },
    /// The dyadic class K_k(2^e1, .., 2^ek, 1) of one point, or a histogram
    Classify {
        #[command(flatten)]
        form: FormArg,
        #[arg(long = "B")]
        b: i64,
        /// Classify every point of [-B, B]^n
        #[arg(long, conflicts_with = "x")]
        histogram: bool,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<i64>>,
    },
    /// N^aux against the per-class sum of N_H counts
    Partition {
        #[command(flatten)]
        form: FormArg,
        #[arg(long = "B")]
        b: i64,
        #[command(flatten)]
        strict: StrictArg,
    },
    /// The class carrying the largest share of N^aux, with its certificate
    Pigeonhole {
        #[command(flatten)]
        form: FormArg,
        #[arg(long = "B")]
        b: i64,
        #[command(flatten)]
        strict: StrictArg,
    },
    /// Box cover, small-Jacobian subspace or small Hessian map for one class
    Trichotomy {
        #[command(flatten)]
        form: FormArg,
        #[arg(long = "B")]
        b: i64,
        #[arg(long = "C")]
        c: f64,
        #[arg(long, default_value_t = 0)]
        sigma: usize,
        /// `e1,..,ek;tail`; defaults to the pigeonhole class
        #[arg(long, allow_hyphen_values = true)]
        class: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum DavenportCmd {
    /// Exact check of (H y^(i))_k against the signed minors at random points
    Verify {
        #[command(flatten)]
        form: FormArg,
        #[arg(long)]
        b: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 9)]
        radius: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sampled ratio for the trilinear bound on the y-vector span at x0
    Trilinear {
        #[command(flatten)]
        form: FormArg,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<String>,
        #[arg(long)]
        b: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Either N^aux(B) <= kappa B^(n+sigma) L^n or subspaces X, Y with small trilinear form
    Dichotomy {
        #[command(flatten)]
        form: FormArg,
        #[arg(long = "B")]
        b: i64,
        #[arg(long = "C")]
        c: f64,
        #[arg(long, default_value_t = 0)]
        sigma: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// 1 + max dim Sing V(beta . c) over a diagonal system
    Sigma {
        #[arg(long)]
        form: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum CircleCmd {
    /// N(P) = #{x : x / P in [-1, 1]^n, c(x) = 0}
    Count {
        #[arg(long)]
        form: PathBuf,
        #[arg(long = "P", value_delimiter = ',')]
        p: Vec<i64>,
    },
    /// Product of local densities over primes up to the cutoff
    Series {
        #[arg(long)]
        form: PathBuf,
        #[arg(long, default_value_t = 50)]
        cutoff: u64,
        #[arg(long, default_value = "auto", value_parser = parse_depth)]
        depth: Depth,
    },
    /// Monte Carlo real density at epsilon and epsilon / 2
    Integral {
        #[arg(long)]
        form: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value = "1e6", value_parser = parse_count)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// N(P) / (S J P^(n-3)) for each P
    Report {
        #[arg(long)]
        form: PathBuf,
        #[arg(long = "P", value_delimiter = ',')]
        p: Vec<i64>,
        #[arg(long, default_value_t = 50)]
        cutoff: u64,
        #[arg(long, default_value = "auto", value_parser = parse_depth)]
        depth: Depth,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value = "1e7", value_parser = parse_count)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_depth(s: &str) -> std::result::Result<Depth, String> {
    if s == "auto" {
        return Ok(Depth::Auto);
    }
    s.parse::<u32>()
        .map(Depth::Fixed)
        .map_err(|_| format!("depth must be `auto` or a non-negative integer, got {s:?}"))
}

/// Accepts `10000000` and `1e7`.
fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("not a count: {s:?}"))?;
    if v.fract() != 0.0 || !(0.0..=u64::MAX as f64).contains(&v) {
        return Err(format!("not a whole number: {s:?}"));
    }
    Ok(v as u64)
}

/// Result of one command: a JSON value and, for tabular commands, rows.
struct Output {
    command: &'static str,
    result: Value,
    table: Option<Table>,
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Output {
    fn json(command: &'static str, result: impl Serialize) -> CliResult<Self> {
        Ok(Output {
            command,
            result: to_value(result)?,
            table: None,
        })
    }

    fn with_table(mut self, header: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        self.table = Some(Table { header, rows });
        self
    }

    fn render(&self, format: Option<Format>) -> CliResult<Vec<u8>> {
        let format = format.unwrap_or(if self.table.is_some() { Format::Csv } else { Format::Json });
        match format {
            Format::Json => {
                let doc = json!({ "schema": SCHEMA, "command": self.command, "result": self.result });
                let mut text = serde_json::to_vec_pretty(&doc).map_err(|e| usage(e.to_string()))?;
                text.push(b'\n');
                Ok(text)
            }
            Format::Csv => {
                let table = self
                    .table
                    .as_ref()
                    .ok_or_else(|| usage(format!("`{}` has no tabular output; use --format json", self.command)))?;
                let mut w = csv::Writer::from_writer(Vec::new());
                let csv_err = |e: csv::Error| CliError::Io(std::io::Error::other(e));
                w.write_record(&table.header).map_err(csv_err)?;
                for row in &table.rows {
                    w.write_record(row).map_err(csv_err)?;
                }
                w.into_inner().map_err(|e| CliError::Io(e.into_error()))
            }
        }
    }
}

fn to_value(v: impl Serialize) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| usage(e.to_string()))
}

/// Exact values print as `p/q` strings, floats as JSON numbers.
fn show<S: Scalar>(v: &S) -> Value {
    match S::BACKEND {
        Backend::Exact => Value::String(v.to_exact().map(|q| q.to_string()).unwrap_or_default()),
        Backend::Float => json!(v.as_f64()),
    }
}

fn show_matrix<S: Scalar>(m: &Matrix<S>) -> Value {
    Value::Array(m.to_rows().iter().map(|r| Value::Array(r.iter().map(show).collect())).collect())
}

/// Conversion from the exact values read on the command line.
trait Lift: Scalar {
    fn lift(q: &Rational) -> Self;
}

impl Lift for Rational {
    fn lift(q: &Rational) -> Self {
        q.clone()
    }
}

impl Lift for f64 {
    fn lift(q: &Rational) -> Self {
        q.as_f64()
    }
}

fn lift_vec<S: Lift>(v: &[Rational]) -> Vec<S> {
    v.iter().map(S::lift).collect()
}

fn parse_values(items: &[String]) -> CliResult<Vec<Rational>> {
    items
        .iter()
        .map(|s| formfile::parse_value(s).map_err(|m| usage(format!("--x: {m}"))))
        .collect()
}

fn parse_matrix(text: &str) -> CliResult<Matrix<Rational>> {
    let rows = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|v| formfile::parse_value(v).map_err(|m| usage(format!("matrix entry: {m}"))))
                .collect::<CliResult<Vec<_>>>()
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Matrix::from_rows(rows)?)
}

fn parse_class(text: &str) -> CliResult<DyadicClass> {
    let (head, tail) = text.split_once(';').unwrap_or((text, "0"));
    let exponents = if head.trim().is_empty() {
        Vec::new()
    } else {
        head.split(',')
            .map(|e| e.trim().parse::<i32>().map_err(|_| usage(format!("bad class exponent {e:?}"))))
            .collect::<CliResult<Vec<_>>>()?
    };
    let tail = tail
        .trim()
        .parse::<i32>()
        .map_err(|_| usage(format!("bad tail exponent {tail:?}")))?;
    Ok(DyadicClass::new(exponents, tail)?)
}

fn read_file(path: &PathBuf) -> CliResult<FormFile> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    formfile::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

struct Ctx {
    backend: Option<BackendArg>,
}

impl Ctx {
    fn backend(&self, file: &FormFile) -> Backend {
        match self.backend {
            Some(BackendArg::Exact) => Backend::Exact,
            Some(BackendArg::Float) => Backend::Float,
            None => file.backend,
        }
    }

    fn form(&self, arg: &FormArg) -> CliResult<(CubicForm<Rational>, Backend)> {
        let file = read_file(&arg.form)?;
        let backend = self.backend(&file);
        let form = file
            .forms
            .get(arg.index.wrapping_sub(1))
            .cloned()
            .ok_or_else(|| usage(format!("--index {} outside 1..={}", arg.index, file.forms.len())))?;
        Ok((form, backend))
    }
}

/// Runs `$body` with `$f` bound to the form in the requested backend.
macro_rules! with_backend {
    ($form:expr, $backend:expr, |$f:ident| $body:expr) => {
        match $backend {
            Backend::Exact => {
                let $f: CubicForm<Rational> = $form;
                $body
            }
            Backend::Float => {
                let $f: CubicForm<f64> = $form.to_float();
                $body
            }
        }
    };
}

fn form_cmd(ctx: &Ctx, cmd: &FormCmd) -> CliResult<Output> {
    match cmd {
        FormCmd::Info { form } => {
            let (c, backend) = ctx.form(form)?;
            with_backend!(c, backend, |c| {
                let coefficients: Vec<Value> = c
                    .coefficients()
                    .iter()
                    .map(|(&[i, j, k], v)| json!({ "monomial": [i + 1, j + 1, k + 1], "value": show(v) }))
                    .collect();
                Output::json(
                    "form info",
                    json!({
                        "n": c.n(),
                        "backend": backend,
                        "zero": c.is_zero(),
                        "norm": c.sup_norm().ok().map(|v| show(&v)),
                        "diagonal": c.diagonal_coefficients().is_some(),
                        "coefficients": coefficients,
                    }),
                )
            })
        }
        FormCmd::Eval { form, x } => {
            let (c, backend) = ctx.form(form)?;
            let x = parse_values(x)?;
            with_backend!(c, backend, |c| {
                let v = c.eval(&lift_vec(&x))?;
                Output::json("form eval", json!({ "value": show(&v) }))
            })
        }
        FormCmd::Hessian { form, x } => {
            let (c, backend) = ctx.form(form)?;
            let x = parse_values(x)?;
            with_backend!(c, backend, |c| {
                let h = c.hessian(&lift_vec(&x))?;
                let sv = singular_values(h.to_f64().matrix())?;
                Output::json(
                    "form hessian",
                    json!({
                        "hessian": show_matrix(h.matrix()),
                        "sup_norm": show(&h.sup_norm()),
                        "singular_values": sv.values,
                    }),
                )
            })
        }
    }
}

fn minors_cmd(ctx: &Ctx, cmd: &MinorsCmd) -> CliResult<Output> {
    match cmd {
        MinorsCmd::Vector { form, x, k } => {
            let (c, backend) = ctx.form(form)?;
            let x = parse_values(x)?;
            with_backend!(c, backend, |c| {
                let mv = minors_vector(&c, &lift_vec(&x), *k)?;
                Output::json(
                    "minors vector",
                    json!({
                        "k": k,
                        "entries": mv.entries.iter().map(show).collect::<Vec<_>>(),
                        "sup_norm": show(&mv.sup_norm()),
                    }),
                )
            })
        }
        MinorsCmd::Jacobian { form, x, k } => {
            let (c, backend) = ctx.form(form)?;
            let x = parse_values(x)?;
            with_backend!(c, backend, |c| {
                let j = minors_jacobian(&c, &lift_vec(&x), *k)?;
                Output::json("minors jacobian", json!({ "k": k, "jacobian": show_matrix(&j) }))
            })
        }
        MinorsCmd::Bounds { form, x, k } => {
            let (c, _) = ctx.form(form)?;
            let x = parse_values(x)?;
            let cf = c.to_float();
            let h = cf.hessian(&lift_vec(&x))?;
            Output::json("minors bounds", minor_sv_bounds(h.matrix(), *k)?)
        }
        MinorsCmd::CauchyBinet { left, right, k } => {
            let l = parse_matrix(left)?;
            let m = parse_matrix(right)?;
            let check = cauchy_binet(&l, &m, *k)?;
            Output::json(
                "minors cauchy-binet",
                json!({
                    "k": k,
                    "holds": check.holds(),
                    "compound_of_product": show_matrix(&check.compound_of_product),
                    "product_of_compounds": show_matrix(&check.product_of_compounds),
                }),
            )
        }
    }
}

fn count_cmd(ctx: &Ctx, cmd: &CountCmd) -> CliResult<Output> {
    match cmd {
        CountCmd::Aux {
            form,
            b,
            strict,
            eq,
            by_class,
        } => {
            let (c, backend) = ctx.form(form)?;
            let strictness = strict.get();
            with_backend!(c, backend, |c| {
                if *by_class {
                    let r = count_aux_by_class(&c, *b, strictness)?;
                    let rows = r
                        .breakdown
                        .iter()
                        .flatten()
                        .map(|cc| vec![cc.label.clone(), cc.points.to_string(), cc.pairs.to_string()])
                        .collect();
                    Ok(Output::json("count aux", &r)?.with_table(vec!["class", "points", "pairs"], rows))
                } else {
                    let r = if *eq { count_aux_eq(&c, *b)? } else { count_aux(&c, *b, strictness)? };
                    let relation = if *eq { "eq".to_string() } else { format!("{:?}", r.strictness).to_lowercase() };
                    let row = vec![r.b.to_string(), relation, r.count.to_string()];
                    Ok(Output::json("count aux", &r)?.with_table(vec!["B", "relation", "count"], vec![row]))
                }
            })
        }
        CountCmd::Nh {
            matrix,
            form,
            index,
            x,
            b,
            strict,
        } => {
            let h: SymMatrix<Rational> = match (matrix, form) {
                (Some(m), _) => SymMatrix::new(parse_matrix(m)?)?,
                (None, Some(path)) => {
                    let (c, _) = ctx.form(&FormArg {
                        form: path.clone(),
                        index: *index,
                    })?;
                    let x = parse_values(x.as_deref().unwrap_or_default())?;
                    c.hessian(&x)?
                }
                (None, None) => return Err(usage("give --matrix or --form with --x")),
            };
            let strictness = strict.get();
            let r = count_nh(&h, *b, strictness)?;
            let bound = ellipsoid_bound(&h, *b as f64)?;
            let row = vec![
                b.to_string(),
                format!("{strictness:?}").to_lowercase(),
                r.count.to_string(),
                bound.bound.to_string(),
            ];
            Ok(
                Output::json("count nh", json!({ "count": r, "ellipsoid": bound }))?
                    .with_table(vec!["B", "relation", "count", "ellipsoid_bound"], vec![row]),
            )
        }
        CountCmd::Classify { form, b, histogram, x } => {
            let (c, backend) = ctx.form(form)?;
            with_backend!(c, backend, |c| {
                if *histogram {
                    let hist = class_histogram(&c, *b)?;
                    let rows: Vec<Vec<String>> =
                        hist.iter().map(|(k, v)| vec![k.to_string(), k.k().to_string(), v.to_string()]).collect();
                    let result: Vec<Value> = hist
                        .iter()
                        .map(|(k, v)| json!({ "class": k, "label": k.to_string(), "points": v }))
                        .collect();
                    Ok(Output::json("count classify", result)?.with_table(vec!["class", "k", "points"], rows))
                } else {
                    let x = x.as_ref().ok_or_else(|| usage("give --x or --histogram"))?;
                    let class = classify_dyadic(&c, x, *b)?;
                    let row = vec![class.to_string(), class.k().to_string()];
                    Ok(Output::json("count classify", json!({ "class": class, "label": class.to_string() }))?
                        .with_table(vec!["class", "k"], vec![row]))
                }
            })
        }
        CountCmd::Partition { form, b, strict } => {
            let (c, backend) = ctx.form(form)?;
            with_backend!(c, backend, |c| {
                let r = partition_check(&c, *b, strict.get())?;
                let rows = r
                    .classes
                    .iter()
                    .map(|cc| vec![cc.label.clone(), cc.points.to_string(), cc.pairs.to_string()])
                    .collect();
                Ok(Output::json("count partition", &r)?.with_table(vec!["class", "points", "pairs"], rows))
            })
        }
        CountCmd::Pigeonhole { form, b, strict } => {
            let (c, backend) = ctx.form(form)?;
            with_backend!(c, backend, |c| Output::json("count pigeonhole", pigeonhole(&c, *b, strict.get())?))
        }
        CountCmd::Trichotomy {
            form,
            b,
            c: big_c,
            sigma,
            class,
        } => {
            let (c, backend) = ctx.form(form)?;
            with_backend!(c, backend, |c| {
                let class = match class {
                    Some(text) => parse_class(text)?,
                    None => pigeonhole(&c, *b, Strictness::Strict)?.class,
                };
                let params = TrichotomyParams {
                    b: *b,
                    c: *big_c,
                    sigma: *sigma,
                };
                let r = trichotomy(&c, params, &class)?;
                Output::json(
                    "count trichotomy",
                    json!({ "class": class.to_string(), "branch": r.label(), "witness": r }),
                )
            })
        }
    }
}

fn davenport_cmd(ctx: &Ctx, cmd: &DavenportCmd) -> CliResult<Output> {
    match cmd {
        DavenportCmd::Verify {
            form,
            b,
            trials,
            radius,
            seed,
        } => {
            // the identity is checked in exact arithmetic whatever the backend
            let (c, _) = ctx.form(form)?;
            Output::json("davenport verify", verify_hy_identity(&c, *b, *trials, *radius, *seed)?)
        }
        DavenportCmd::Trilinear {
            form,
            x,
            b,
            samples,
            seed,
        } => {
            let (c, backend) = ctx.form(form)?;
            let x = parse_values(x)?;
            with_backend!(c, backend, |c| Output::json(
                "davenport trilinear",
                trilinear_bound_check(&c, &lift_vec(&x), *b, *samples, *seed)?
            ))
        }
        DavenportCmd::Dichotomy {
            form,
            b,
            c: big_c,
            sigma,
            samples,
            seed,
        } => {
            let (c, backend) = ctx.form(form)?;
            let params = DichotomyParams {
                b: *b,
                c: *big_c,
                sigma: *sigma,
                samples: *samples,
                seed: *seed,
            };
            with_backend!(c, backend, |c| {
                let d = dichotomy(&c, params)?;
                let candidates = match &d {
                    Dichotomy::Pair(pair) => Some(singular_candidates(&c, pair)?),
                    _ => None,
                };
                Output::json(
                    "davenport dichotomy",
                    json!({ "params": params, "outcome": d.label(), "certificate": d, "singular_candidates": candidates }),
                )
            })
        }
        DavenportCmd::Sigma { form } => {
            let file = read_file(form)?;
            Output::json("davenport sigma", sigma_diagonal(&file.forms)?)
        }
    }
}

fn system(path: &PathBuf) -> CliResult<DiagonalSystem> {
    let file = read_file(path)?;
    Ok(DiagonalSystem::from_forms(&file.forms)?)
}

fn fmt_f64(v: f64) -> String {
    // shortest round-trip representation, as in the JSON output
    serde_json::to_string(&v).unwrap_or_else(|_| v.to_string())
}

fn circle_cmd(cmd: &CircleCmd) -> CliResult<Output> {
    match cmd {
        CircleCmd::Count { form, p } => {
            let s = system(form)?;
            if p.is_empty() {
                return Err(usage("give at least one --P"));
            }
            let counts = p
                .iter()
                .map(|&p| Ok((p, count_zeros_box(&s, p)?)))
                .collect::<CliResult<Vec<_>>>()?;
            let rows = counts.iter().map(|(p, n)| vec![p.to_string(), n.to_string()]).collect();
            let result: Vec<Value> = counts.iter().map(|(p, n)| json!({ "P": p, "count": n })).collect();
            Ok(Output::json("circle count", result)?.with_table(vec!["P", "count"], rows))
        }
        CircleCmd::Series { form, cutoff, depth } => {
            let s = system(form)?;
            let r = singular_series_estimate(&s, *cutoff, *depth)?;
            let rows = r
                .factors
                .iter()
                .zip(&r.partial_products)
                .map(|(f, prod)| {
                    vec![
                        f.p.to_string(),
                        f.k.to_string(),
                        f.exact.clone(),
                        fmt_f64(f.density),
                        f.primitive.to_string(),
                        fmt_f64(*prod),
                    ]
                })
                .collect();
            Ok(Output::json("circle series", &r)?.with_table(
                vec!["p", "k", "density_exact", "density", "primitive", "partial_product"],
                rows,
            ))
        }
        CircleCmd::Integral {
            form,
            epsilon,
            samples,
            seed,
        } => {
            let s = system(form)?;
            Output::json("circle integral", singular_integral_estimate(&s, *epsilon, *samples, *seed)?)
        }
        CircleCmd::Report {
            form,
            p,
            cutoff,
            depth,
            epsilon,
            samples,
            seed,
        } => {
            let s = system(form)?;
            let params = ReportParams {
                cutoff: *cutoff,
                depth: *depth,
                epsilon: *epsilon,
                samples: *samples,
                seed: *seed,
            };
            let r = convergence_report(&s, p, params)?;
            let rows = r
                .rows
                .iter()
                .map(|row| {
                    vec![
                        row.p.to_string(),
                        row.count.to_string(),
                        fmt_f64(row.series),
                        fmt_f64(row.integral),
                        fmt_f64(row.predicted),
                        fmt_f64(row.ratio),
                    ]
                })
                .collect();
            Ok(Output::json("circle report", json!({ "params": params, "report": r }))?
                .with_table(vec!["P", "count", "series", "integral", "predicted", "ratio"], rows))
        }
    }
}

fn execute(cli: &Cli) -> CliResult<Output> {
    let ctx = Ctx { backend: cli.backend };
    match &cli.command {
        Command::Form(cmd) => form_cmd(&ctx, cmd),
        Command::Minors(cmd) => minors_cmd(&ctx, cmd),
        Command::Count(cmd) => count_cmd(&ctx, cmd),
        Command::Davenport(cmd) => davenport_cmd(&ctx, cmd),
        Command::Circle(cmd) => circle_cmd(cmd),
    }
}

fn thread_count(cli: &Cli) -> CliResult<usize> {
    if let Some(t) = cli.threads {
        return Ok(t);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(0),
    }
}

fn run_parsed(cli: &Cli) -> CliResult<Vec<u8>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(cli)?)
        .build()
        .map_err(|e| usage(e.to_string()))?;
    let out = pool.install(|| execute(cli))?;
    out.render(cli.format)
}

/// Parses `argv` (program name first), runs the command and writes the
/// result. Returns 0 on success, 1 on a domain error, 2 on a usage error.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = run_parsed(&cli).and_then(|bytes| match &cli.output {
        Some(path) => std::fs::write(path, bytes).map_err(CliError::from),
        None => stdout.write_all(&bytes).map_err(CliError::from),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(std::iter::once("cubic-aux").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn counts() {
        assert_eq!(parse_count("1e7").unwrap(), 10_000_000);
        assert_eq!(parse_count("42").unwrap(), 42);
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("x").is_err());
    }

    #[test]
    fn depths_and_classes() {
        assert_eq!(parse_depth("auto").unwrap(), Depth::Auto);
        assert_eq!(parse_depth("3").unwrap(), Depth::Fixed(3));
        assert!(parse_depth("-1").is_err());
        let k = parse_class("3,1;0").unwrap();
        assert_eq!(k.exponents, vec![3, 1]);
        assert_eq!(parse_class(";0").unwrap().k(), 0);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_capture(&["count", "aux"]).0, 2);
        assert_eq!(run_capture(&["count", "aux", "--form", "/nonexistent.form", "--B", "4"]).0, 2);
        assert_eq!(run_capture(&["--help"]).0, 0);
    }

    #[test]
    fn cauchy_binet_command() {
        let (code, out, _) =
            run_capture(&["minors", "cauchy-binet", "--left", "1,2;3,4", "--right", "0,1;1,0", "--k", "2"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["result"]["holds"], true);
        assert_eq!(v["result"]["compound_of_product"][0][0], "2");
    }

    #[test]
    fn csv_needs_a_table() {
        let (code, _, err) =
            run_capture(&["minors", "cauchy-binet", "--left", "1", "--right", "1", "--k", "1", "--format", "csv"]);
        assert_eq!(code, 2, "{err}");
    }
}
