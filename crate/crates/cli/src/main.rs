mod config;
mod emit;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use nilspec_core::estimates::{
    interpolated_weight_check, l1_chain, product_factorization_check, scaling_experiment, standard_family,
    weighted_plancherel_check, EstimateReport, LatticePlan, ScalingLattice,
};
use nilspec_core::group::check_assumption_a;
use nilspec_core::group::io::GroupFile;
use nilspec_core::kernel::{eval_kernel, plancherel_spectral_norm, Lattice, Point, QuadratureSpec};
use nilspec_core::multiplier::{mw_norm, sobolev_norm, BumpSpec, JointMultiplier, Multiplier, SobolevGrid};
use nilspec_core::par::ExecPolicy;
use nilspec_core::special::identities;
use nilspec_core::{Error, Result};

use config::{load_group, load_multiplier, parse_lattice, parse_quad, paths, read_points, RunConfig};
use emit::{f, json, kernel_csv, wants_csv, write_out, Csv};

#[derive(Parser, Debug)]
#[command(name = "nilspec", version, about = "Spectral multipliers on two-step stratified groups")]
struct Cli {
    /// Seed for every sampled quantity.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file; stdout when absent. A `.csv` extension selects CSV where offered.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Sample the structural assumption on a group file.
    CheckAssumption {
        #[arg(long)]
        group: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Laguerre, Hermite and Fourier-Wigner identity suite.
    Identities,
    /// Sobolev (and optionally Mihlin-Hörmander) norm of a multiplier.
    Norms {
        #[arg(long)]
        multiplier: PathBuf,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        mw: bool,
    },
    /// Kernel of F(L) at points or on a lattice (CSV).
    Kernel {
        #[arg(long)]
        group: PathBuf,
        /// One file for F(L); one per block for a tensor multiplier.
        #[arg(long, required = true)]
        multiplier: Vec<PathBuf>,
        #[arg(long, conflicts_with = "lattice", required_unless_present = "lattice")]
        points: Option<PathBuf>,
        /// e.g. `kind=radial,z_max=4,z_step=0.5,u_max=4,u_step=0.5`
        #[arg(long)]
        lattice: Option<String>,
        /// Overrides, e.g. `n_angle=48,refine=false`.
        #[arg(long)]
        quad: Option<String>,
    },
    /// Spectral-side and grid-side L² norms of the kernel.
    Plancherel {
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        multiplier: PathBuf,
        #[arg(long)]
        lattice: Option<String>,
        #[arg(long)]
        quad: Option<String>,
    },
    /// Estimate experiments.
    Estimate {
        #[command(subcommand)]
        kind: Estimate,
    },
}

#[derive(Args, Debug, Serialize)]
struct Common {
    #[arg(long)]
    group: PathBuf,
    #[arg(long)]
    quad: Option<String>,
    /// Initial lattice extents (doubled on demand).
    #[arg(long, default_value_t = 16.0)]
    z_max: f64,
    #[arg(long, default_value_t = 32.0)]
    u_max: f64,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Estimate {
    /// Dyadic scaling law of the truncated multipliers F(L)χ(|U|/M).
    Scaling {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        multiplier: PathBuf,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 2.0)]
        m0: f64,
        #[arg(long, default_value_t = 5)]
        steps: usize,
    },
    /// Weighted Plancherel estimate across a family.
    Weighted {
        #[command(flatten)]
        common: Common,
        /// `standard` or a JSON file holding an array of multipliers.
        #[arg(long, conflicts_with = "multiplier")]
        family: Option<String>,
        #[arg(long)]
        multiplier: Option<PathBuf>,
        #[arg(long)]
        r: f64,
    },
    /// Interpolated weight family.
    Interp {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with = "multiplier")]
        family: Option<String>,
        #[arg(long)]
        multiplier: Option<PathBuf>,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        beta: f64,
    },
    /// L¹ bound through Cauchy-Schwarz with the weight w_s.
    L1chain {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        multiplier: PathBuf,
        #[arg(long)]
        s: f64,
    },
    /// Kernel and norm factorization on a direct product.
    Product {
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        group2: PathBuf,
        #[arg(long)]
        multiplier: PathBuf,
        #[arg(long)]
        multiplier2: PathBuf,
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long)]
        points2: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value_t = 1.0)]
        s2: f64,
        /// Overrides over `n_angle=96` (the joint η-integral is two-dimensional).
        #[arg(long)]
        quad: Option<String>,
    },
}

impl Command {
    fn input_files(&self) -> Vec<&Path> {
        let mut v: Vec<&PathBuf> = Vec::new();
        match self {
            Command::CheckAssumption { group, .. } => v.push(group),
            Command::Identities => {}
            Command::Norms { multiplier, .. } => v.push(multiplier),
            Command::Kernel {
                group, multiplier, points, ..
            } => {
                v.push(group);
                v.extend(multiplier);
                v.extend(points);
            }
            Command::Plancherel { group, multiplier, .. } => v.extend([group, multiplier]),
            Command::Estimate { kind } => match kind {
                Estimate::Scaling { common, multiplier, .. } | Estimate::L1chain { common, multiplier, .. } => {
                    v.extend([&common.group, multiplier])
                }
                Estimate::Weighted { common, multiplier, .. } | Estimate::Interp { common, multiplier, .. } => {
                    v.push(&common.group);
                    v.extend(multiplier);
                }
                Estimate::Product {
                    group,
                    group2,
                    multiplier,
                    multiplier2,
                    points,
                    points2,
                    ..
                } => {
                    v.extend([group, group2, multiplier, multiplier2]);
                    v.extend(points);
                    v.extend(points2);
                }
            },
        }
        paths(v)
    }

    fn family_file(&self) -> Option<&Path> {
        match self {
            Command::Estimate {
                kind: Estimate::Weighted { family: Some(s), .. } | Estimate::Interp { family: Some(s), .. },
            } if s != "standard" => Some(Path::new(s)),
            _ => None,
        }
    }
}

/// Outcome of a subcommand: the text to write, or an accuracy failure
/// found outside the core error type.
enum Outcome {
    Done(String),
    Inaccurate(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set up {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(Outcome::Done(text)) => match write_out(cli.out.as_deref(), &text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Ok(Outcome::Inaccurate(msg)) => {
            eprintln!("accuracy error: {msg}");
            ExitCode::from(2)
        }
        Err(e) if e.is_accuracy() => {
            eprintln!("accuracy error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    let mut files = cli.command.input_files();
    files.extend(cli.command.family_file());
    let cfg = RunConfig::new(cli.seed, &cli.command, &files)?;
    let hash = cfg.hash();
    let csv = wants_csv(cli.out.as_deref());
    let policy = ExecPolicy::Parallel;
    let seed = cli.seed;

    match &cli.command {
        Command::CheckAssumption { group, samples, tol } => {
            let (g, dec) = load_group(group, seed)?;
            let rep = check_assumption_a(&g, &dec, *samples, *tol, seed, policy);
            #[derive(Serialize)]
            struct Out<T: Serialize> {
                group: GroupFile,
                report: T,
            }
            let out = Out {
                group: GroupFile::from_group(&g, Some(&dec)),
                report: rep,
            };
            Ok(Outcome::Done(json(&hash, &cfg, &out)))
        }
        Command::Identities => {
            let rows = identities::run_suite(seed);
            if let Some(bad) = rows.iter().find(|r| !r.pass) {
                return Ok(Outcome::Inaccurate(format!(
                    "{}: max error {:e} exceeds tolerance {:e}",
                    bad.name, bad.max_err, bad.tol
                )));
            }
            if csv {
                let cols = ["name", "max_err", "tol", "cases", "pass"].map(String::from);
                let mut t = Csv::new(&hash, &[("seed", seed.to_string())], &cols);
                for r in &rows {
                    t.row(&[r.name.clone(), f(r.max_err), f(r.tol), r.cases.to_string(), r.pass.to_string()]);
                }
                return Ok(Outcome::Done(t.finish()));
            }
            Ok(Outcome::Done(json(&hash, &cfg, &rows)))
        }
        Command::Norms { multiplier, s, mw } => {
            let m = load_multiplier(multiplier)?;
            let sob = sobolev_norm(&m, *s, SobolevGrid::default());
            if sob.unresolved {
                return Ok(Outcome::Inaccurate(format!(
                    "Sobolev norm not resolved: fine = {:e}, coarse = {:e}",
                    sob.norm, sob.coarse
                )));
            }
            let mwr = mw.then(|| mw_norm(&m, *s, BumpSpec::MwWindow, SobolevGrid::default(), policy));
            #[derive(Serialize)]
            struct Out<A: Serialize, B: Serialize> {
                multiplier: String,
                s: f64,
                sobolev: A,
                mw: Option<B>,
            }
            let out = Out {
                multiplier: m.tag(),
                s: *s,
                sobolev: sob,
                mw: mwr,
            };
            Ok(Outcome::Done(json(&hash, &cfg, &out)))
        }
        Command::Kernel {
            group,
            multiplier,
            points,
            lattice,
            quad,
        } => {
            let (g, dec) = load_group(group, seed)?;
            let h = joint_multiplier(multiplier, dec.len())?;
            let q = parse_quad(quad.as_deref(), QuadratureSpec::default())?;
            let pts: Vec<Point> = match (points, lattice) {
                (Some(p), _) => read_points(p, g.dim_v(), g.dim_z())?,
                (None, Some(spec)) => Lattice::new(&g, parse_lattice(spec)?)?.points,
                (None, None) => unreachable!("clap requires one of --points and --lattice"),
            };
            let grid = eval_kernel(&g, &dec, &h, &pts, &q, policy)?;
            if cli.out.is_none() || csv {
                Ok(Outcome::Done(kernel_csv(&hash, &grid, g.dim_v(), g.dim_z())))
            } else {
                Ok(Outcome::Done(json(&hash, &cfg, &grid)))
            }
        }
        Command::Plancherel {
            group,
            multiplier,
            lattice,
            quad,
        } => {
            let (g, dec) = load_group(group, seed)?;
            let h = JointMultiplier::Spectral(load_multiplier(multiplier)?);
            let q = parse_quad(quad.as_deref(), QuadratureSpec::default())?;
            let spec = plancherel_spectral_norm(&g, &dec, &h, &q)?;
            let mut plan = LatticePlan::for_group(&g, &dec, &h, 14.0, 32.0);
            if let Some(l) = lattice {
                plan.spec = parse_lattice(l)?;
            }
            let unit = |_: &[f64], _: &[f64]| 1.0;
            let sk = nilspec_core::estimates::sample_kernel(&g, &dec, &h, &plan, &q, policy, &[&unit])?;
            let grid = sk.integrals[0].value.sqrt();
            #[derive(Serialize)]
            struct Out {
                spectral: f64,
                spectral_coarse: f64,
                grid: f64,
                ratio: f64,
                outer_share: f64,
                lattice: nilspec_core::kernel::LatticeSpec,
                quad: QuadratureSpec,
            }
            let out = Out {
                spectral: spec.norm,
                spectral_coarse: spec.coarse,
                grid,
                ratio: grid / spec.norm,
                outer_share: sk.integrals[0].outer_share,
                lattice: sk.lattice.spec,
                quad: q,
            };
            eprintln!("spectral {:e}  grid {:e}  ratio {:.6}", out.spectral, out.grid, out.ratio);
            Ok(Outcome::Done(json(&hash, &cfg, &out)))
        }
        Command::Estimate { kind } => {
            let rep = run_estimate(kind, seed, policy)?;
            if csv {
                Ok(Outcome::Done(report_csv(&hash, &rep)))
            } else {
                #[derive(Serialize)]
                struct Out<'a> {
                    report: &'a EstimateReport,
                    provenance: Provenance,
                }
                let out = Out {
                    report: &rep,
                    provenance: provenance(kind)?,
                };
                Ok(Outcome::Done(json(&hash, &cfg, &out)))
            }
        }
    }
}

fn joint_multiplier(files: &[PathBuf], blocks: usize) -> Result<JointMultiplier> {
    let ms: Vec<Multiplier> = files.iter().map(|p| load_multiplier(p)).collect::<Result<_>>()?;
    match ms.len() {
        1 => Ok(JointMultiplier::Spectral(ms.into_iter().next().expect("one"))),
        n if n == blocks => Ok(JointMultiplier::Tensor(ms)),
        n => Err(Error::InvalidInput(format!(
            "got {n} multipliers; give one, or one per block ({blocks})"
        ))),
    }
}

fn load_family(family: Option<&str>, multiplier: Option<&PathBuf>) -> Result<Vec<Multiplier>> {
    match (family, multiplier) {
        (_, Some(p)) => Ok(vec![load_multiplier(p)?]),
        (None | Some("standard"), None) => Ok(standard_family()),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)?;
            let raw: Vec<serde_json::Value> = serde_json::from_str(&text)?;
            raw.iter().map(|v| Multiplier::from_json(&v.to_string())).collect()
        }
    }
}

fn default_quad(kind: &Estimate) -> QuadratureSpec {
    match kind {
        Estimate::Product { .. } => QuadratureSpec {
            n_angle: 96,
            ..QuadratureSpec::default()
        },
        _ => QuadratureSpec::default(),
    }
}

fn quad_arg(kind: &Estimate) -> Option<&str> {
    match kind {
        Estimate::Scaling { common, .. }
        | Estimate::Weighted { common, .. }
        | Estimate::Interp { common, .. }
        | Estimate::L1chain { common, .. } => common.quad.as_deref(),
        Estimate::Product { quad, .. } => quad.as_deref(),
    }
}

#[derive(Serialize)]
struct Provenance {
    quad: QuadratureSpec,
    lattice: Option<LatticeSummary>,
}

#[derive(Serialize)]
struct LatticeSummary {
    z_max: f64,
    u_max: f64,
    max_doublings: usize,
}

fn provenance(kind: &Estimate) -> Result<Provenance> {
    let quad = parse_quad(quad_arg(kind), default_quad(kind))?;
    let lattice = match kind {
        Estimate::Scaling { .. } => {
            let l = ScalingLattice::default();
            Some(LatticeSummary {
                z_max: l.z_max,
                u_max: l.u_max,
                max_doublings: l.max_doublings,
            })
        }
        Estimate::Weighted { common, .. } | Estimate::Interp { common, .. } | Estimate::L1chain { common, .. } => {
            Some(LatticeSummary {
                z_max: common.z_max,
                u_max: common.u_max,
                max_doublings: 2,
            })
        }
        Estimate::Product { .. } => None,
    };
    Ok(Provenance { quad, lattice })
}

fn default_points(dim_v: usize, dim_z: usize) -> Vec<Point> {
    let mut a = vec![0.0; dim_v];
    let mut b = vec![0.0; dim_v];
    a[0] = 0.4;
    b[dim_v - 1] = 0.5;
    let mut ua = vec![0.0; dim_z];
    let mut ub = vec![0.0; dim_z];
    ua[0] = 0.3;
    ub[dim_z - 1] = -0.4;
    vec![(vec![0.0; dim_v], vec![0.0; dim_z]), (a, ua), (b, ub)]
}

fn run_estimate(kind: &Estimate, seed: u64, policy: ExecPolicy) -> Result<EstimateReport> {
    let quad = parse_quad(quad_arg(kind), default_quad(kind))?;
    match kind {
        Estimate::Scaling {
            common,
            multiplier,
            r,
            m0,
            steps,
        } => {
            let (g, dec) = load_group(&common.group, seed)?;
            let f = load_multiplier(multiplier)?;
            if *steps < 2 {
                return Err(Error::InvalidInput("--steps must be at least 2".into()));
            }
            let ms: Vec<f64> = (0..*steps).map(|k| m0 * 2f64.powi(-(k as i32))).collect();
            scaling_experiment(&g, &dec, &f, *r, &ms, &ScalingLattice::default(), &quad, policy)
        }
        Estimate::Weighted {
            common,
            family,
            multiplier,
            r,
        } => {
            let (g, dec) = load_group(&common.group, seed)?;
            let fam = load_family(family.as_deref(), multiplier.as_ref())?;
            let plan = plan_for(&g, &dec, &fam, common)?;
            weighted_plancherel_check(&g, &dec, &fam, *r, &plan, &quad, policy)
        }
        Estimate::Interp {
            common,
            family,
            multiplier,
            alpha,
            r,
            beta,
        } => {
            let (g, dec) = load_group(&common.group, seed)?;
            let fam = load_family(family.as_deref(), multiplier.as_ref())?;
            let plan = plan_for(&g, &dec, &fam, common)?;
            interpolated_weight_check(&g, &dec, &fam, *alpha, *r, *beta, &plan, &quad, policy)
        }
        Estimate::L1chain { common, multiplier, s } => {
            let (g, dec) = load_group(&common.group, seed)?;
            let f = load_multiplier(multiplier)?;
            let plan = plan_for(&g, &dec, std::slice::from_ref(&f), common)?;
            l1_chain(&g, &dec, &f, *s, &plan, &quad, policy)
        }
        Estimate::Product {
            group,
            group2,
            multiplier,
            multiplier2,
            points,
            points2,
            s,
            s2,
            ..
        } => {
            let (g1, d1) = load_group(group, seed)?;
            let (g2, d2) = load_group(group2, seed)?;
            let f1 = load_multiplier(multiplier)?;
            let f2 = load_multiplier(multiplier2)?;
            let p1 = match points {
                Some(p) => read_points(p, g1.dim_v(), g1.dim_z())?,
                None => default_points(g1.dim_v(), g1.dim_z()),
            };
            let p2 = match points2 {
                Some(p) => read_points(p, g2.dim_v(), g2.dim_z())?,
                None => default_points(g2.dim_v(), g2.dim_z()),
            };
            product_factorization_check(&g1, &d1, &g2, &d2, &f1, &f2, &p1, &p2, [*s, *s2], &quad, policy)
        }
    }
}

fn plan_for(
    g: &nilspec_core::group::StratifiedGroup2,
    dec: &nilspec_core::group::LayerDecomposition,
    fam: &[Multiplier],
    common: &Common,
) -> Result<LatticePlan> {
    let Some(first) = fam.first() else {
        return Err(Error::InvalidInput("family is empty".into()));
    };
    if !(common.z_max > 0.0 && common.u_max > 0.0) {
        return Err(Error::InvalidInput("lattice extents must be positive".into()));
    }
    Ok(LatticePlan::for_group(
        g,
        dec,
        &JointMultiplier::Spectral(first.clone()),
        common.z_max,
        common.u_max,
    ))
}

fn report_csv(hash: &str, rep: &EstimateReport) -> String {
    let prov = [("family", rep.family_tag.clone()), ("passed", rep.passed.to_string())];
    let s = |x: &str| x.to_string();
    if let Some(sc) = &rep.scaling {
        let mut t = Csv::new(hash, &prov, &[s("M"), s("lhs"), s("bound"), s("outer_share")]);
        for p in &sc.points {
            t.row(&[f(p.m), f(p.lhs), f(p.bound), f(p.outer_share)]);
        }
        return t.finish();
    }
    if let Some(pr) = &rep.product {
        let cols = ["i", "j", "joint_re", "joint_im", "product_re", "product_im", "rel_err"].map(String::from);
        let mut t = Csv::new(hash, &prov, &cols);
        for p in &pr.points {
            t.row(&[
                p.i.to_string(),
                p.j.to_string(),
                f(p.joint[0]),
                f(p.joint[1]),
                f(p.product[0]),
                f(p.product[1]),
                f(p.rel_err),
            ]);
        }
        return t.finish();
    }
    if let Some(c) = &rep.chain {
        let cols = ["a_l1", "weighted_l2", "w_inv_norm", "b", "f_norm", "b_over_f", "holds"].map(String::from);
        let mut t = Csv::new(hash, &prov, &cols);
        t.row(&[
            f(c.a_l1),
            f(c.weighted_l2),
            f(c.w_inv_norm),
            f(c.b),
            f(c.f_norm),
            f(c.b_over_f),
            c.holds.to_string(),
        ]);
        return t.finish();
    }
    let cols = ["tag", "lhs", "rhs", "ratio", "outer_share", "lattice_z_max", "lattice_u_max"].map(String::from);
    let mut t = Csv::new(hash, &prov, &cols);
    for m in &rep.members {
        t.row(&[
            format!("\"{}\"", m.tag),
            f(m.lhs),
            f(m.rhs),
            f(m.ratio),
            f(m.outer_share),
            f(m.lattice_z_max),
            f(m.lattice_u_max),
        ]);
    }
    t.finish()
}
