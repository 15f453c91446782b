//! Command-line driver for the pseudohermitian geometry laboratory:
//! model construction, verification suites, spectral runs and the
//! pseudo-Einstein pipeline, with JSON/CSV reports.

use clap::{Parser, Subcommand, ValueEnum};
use cr3lab::field::Field;
use cr3lab::operators::{self, Weighted};
use cr3lab::report::Report;
use cr3lab::sampling;
use cr3lab::structures::{self, ExponentSpec, ModelSpec, SolveOptions, StructureData};
use cr3lab::workspace::Workspace;
use cr3lab::{analysis, hodge, spectral, C};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cr3lab",
    version,
    about = "Numerical pseudohermitian geometry on the CR 3-sphere"
)]
struct Cli {
    /// JSON run configuration; command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for JSON/CSV reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Model kind: sphere | left_invariant | perturbed.
    #[arg(long, global = true)]
    model: Option<String>,
    /// Parameter of the left-invariant family.
    #[arg(long, global = true)]
    a: Option<f64>,
    /// Amplitude of the conformal perturbation.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Named exponent of the conformal perturbation (e.g. re_zwbar).
    #[arg(long, global = true)]
    g: Option<String>,
    /// Truncation degree for spectral runs and decompositions.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Workspace degree cap (defaults to 12, and to 16 for spectral runs
    /// on perturbed models).
    #[arg(long, global = true)]
    cap: Option<usize>,
    /// Exponential series order.
    #[arg(long, global = true)]
    j: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Tanaka-Webster structure of a model and report residuals.
    Structure,
    /// Run one of the verification suites.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
    },
    /// Assemble the Paneitz quadratic form, solve the spectrum and check
    /// the eigenvalue bound.
    Spectrum,
    /// Run the pseudo-Einstein construction pipeline.
    Pipeline {
        /// CR-pluriharmonic freedom: named exponent for f (default zero).
        #[arg(long, default_value = "zero")]
        f: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Identities,
    Commutation,
    Transforms,
    Bochner,
    Convexity,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
struct RunConfig {
    model: ModelSpec,
    n: usize,
    cap: Option<usize>,
    exp_order: usize,
    eps: f64,
    seed: u64,
    out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelSpec::Sphere,
            n: 8,
            cap: None,
            exp_order: 12,
            eps: 0.1,
            seed: 7,
            out_dir: None,
        }
    }
}

impl RunConfig {
    fn validate(&self) -> cr3lab::Result<()> {
        if self.n > 12 {
            return Err(cr3lab::Error::Config(format!(
                "truncation n = {} exceeds 12",
                self.n
            )));
        }
        if self.eps > 0.25 {
            return Err(cr3lab::Error::Config(format!(
                "amplitude eps = {} exceeds the series budget 0.25",
                self.eps
            )));
        }
        self.model.validate()
    }

    fn is_perturbed(&self) -> bool {
        matches!(self.model, ModelSpec::Perturbed { .. })
    }

    /// Tight tolerance on exact-polynomial models, the documented
    /// projection/truncation budget on conformally perturbed ones.
    fn tol_exact(&self) -> f64 {
        if self.is_perturbed() {
            1e-6
        } else {
            1e-9
        }
    }
}

fn merge_config(cli: &Cli) -> cr3lab::Result<RunConfig> {
    let mut cfg: RunConfig = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| cr3lab::Error::Config(format!("cannot read {path:?}: {e}")))?;
            serde_json::from_str(&text)
                .map_err(|e| cr3lab::Error::Config(format!("bad config {path:?}: {e}")))?
        }
        None => RunConfig::default(),
    };
    if let Some(eps) = cli.eps {
        cfg.eps = eps;
    }
    if let Some(model) = &cli.model {
        cfg.model = match model.as_str() {
            "sphere" => ModelSpec::Sphere,
            "left_invariant" => ModelSpec::LeftInvariant {
                a: cli.a.unwrap_or(1.1),
            },
            "perturbed" => ModelSpec::Perturbed {
                base: None,
                eps: cfg.eps,
                g: ExponentSpec::Named(cli.g.clone().unwrap_or_else(|| "re_zwbar".into())),
            },
            other => return Err(cr3lab::Error::Config(format!("unknown model '{other}'"))),
        };
    }
    if let Some(n) = cli.n {
        cfg.n = n;
    }
    if let Some(cap) = cli.cap {
        cfg.cap = Some(cap);
    }
    if let Some(j) = cli.j {
        cfg.exp_order = j;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn model_slug(spec: &ModelSpec) -> String {
    spec.label()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { '_' })
        .collect()
}

fn write_report(cfg: &RunConfig, report: &Report) -> cr3lab::Result<()> {
    report.validate()?;
    print!("{}", report.render_text());
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| cr3lab::Error::Config(format!("cannot create {dir:?}: {e}")))?;
        let stem = format!("{}_{}", report.command, model_slug(&cfg.model));
        std::fs::write(dir.join(format!("{stem}.json")), report.to_json())
            .and_then(|_| std::fs::write(dir.join(format!("{stem}.csv")), report.to_csv()))
            .map_err(|e| cr3lab::Error::Config(format!("cannot write report: {e}")))?;
    }
    Ok(())
}

fn setup(
    cfg: &RunConfig,
    spectral_run: bool,
) -> cr3lab::Result<(Workspace, SolveOptions, StructureData)> {
    let cap = cfg.cap.unwrap_or(if spectral_run && cfg.is_perturbed() {
        16
    } else {
        12
    });
    let ws = Workspace::new(cap, cfg.seed)?;
    let opts = SolveOptions {
        exp_order: cfg.exp_order,
        ..SolveOptions::default()
    };
    let sd = structures::model_structure(&ws, &cfg.model, &opts)?;
    Ok((ws, opts, sd))
}

fn cmd_structure(cfg: &RunConfig) -> cr3lab::Result<Report> {
    let (ws, _opts, sd) = setup(cfg, false)?;
    let mut rep = Report::new("structure", &cfg.model.label(), cfg.n, cfg.seed);
    let tol = cfg.tol_exact();
    let cf = &sd.residuals.coframe;
    rep.push(
        "admissibility",
        "dtheta = i theta1 ^ theta1bar",
        cf.admissibility_l2,
        tol.max(1e-7),
    );
    rep.push("coframe duality", "frame pairing", cf.duality, 1e-8);
    rep.push(
        "structure equation re-substitution",
        "dtheta1 = theta1 ^ omega + A theta ^ theta1bar",
        sd.residuals.resubstitution,
        tol,
    );
    rep.push(
        "connection reality",
        "omega + conj(omega) = 0",
        sd.residuals.omega_reality,
        tol,
    );
    rep.push("curvature reality", "eq b", sd.residuals.r_reality, tol);
    let r2 = operators::r_via_commutation(&ws, &sd);
    rep.push(
        "curvature route agreement",
        "eq 6 vs eq b",
        sd.r.sub(&r2).l2_norm(),
        tol.max(1e-6),
    );
    match &cfg.model {
        ModelSpec::Sphere => {
            rep.push(
                "torsion vanishes",
                "Sasakian sphere",
                sd.norm_w(&ws, &sd.a11),
                1e-10,
            );
            let dev = sd.r.sub(&Field::real_constant(cr3lab::SPHERE_R)).l2_norm();
            rep.push("curvature constant R = 2", "eq b", dev, 1e-10);
        }
        ModelSpec::LeftInvariant { a } => {
            let dev =
                sd.r.sub(&Field::real_constant(structures::left_invariant_golden::r(
                    *a,
                )))
                .l2_norm();
            rep.push("curvature matches closed form", "eq b", dev, 1e-9);
            let adev = sd
                .a11
                .sub(&Field::constant(structures::left_invariant_golden::a11(*a)))
                .l2_norm();
            rep.push(
                "torsion matches closed form",
                "structure constants",
                adev,
                1e-9,
            );
        }
        ModelSpec::Perturbed { .. } => {
            rep.push(
                "admissibility within the projection budget",
                "dtheta = i theta1 ^ theta1bar",
                cf.admissibility_l2,
                1e-7,
            );
        }
    }
    Ok(rep)
}

fn cmd_verify(cfg: &RunConfig, suite: Suite) -> cr3lab::Result<Report> {
    match suite {
        Suite::Identities => verify_identities(cfg),
        Suite::Commutation => verify_commutation(cfg),
        Suite::Transforms => verify_transforms(cfg),
        Suite::Bochner => verify_bochner(cfg),
        Suite::Convexity => verify_convexity(cfg),
    }
}

fn verify_identities(cfg: &RunConfig) -> cr3lab::Result<Report> {
    let (ws, _, sd) = setup(cfg, false)?;
    let mut rep = Report::new("verify_identities", &cfg.model.label(), cfg.n, cfg.seed);
    let tol = cfg.tol_exact();
    rep.push(
        "closedness of omega + iR theta",
        "lemma l1",
        structures::check_lemma_l1(&ws, &sd),
        tol.max(1e-6),
    );
    let sig = hodge::construct_sigma(&ws, &sd, tol.max(1e-6))?;
    rep.push(
        "primitive of d omega",
        "lemma l2",
        sig.d_residual,
        tol.max(1e-6),
    );
    let (r1, r2) = hodge::verify_sigma(&ws, &sd, &sig.sigma);
    rep.push("sigma curvature component", "eq 1", r1, tol.max(1e-6));
    rep.push("sigma torsion component", "eq 1", r2, tol.max(1e-6));
    let (_q, q_defect) = structures::q_curvature(&ws, &sd);
    rep.push("Q-curvature route agreement", "eq c", q_defect, tol);
    if matches!(cfg.model, ModelSpec::Sphere | ModelSpec::Perturbed { .. }) {
        let q11 = structures::cartan_tensor(&ws, &sd).value;
        rep.push(
            "Cartan tensor vanishes (spherical)",
            "Q11",
            sd.norm_w(&ws, &q11),
            tol.max(1e-6),
        );
    }
    Ok(rep)
}

fn verify_commutation(cfg: &RunConfig) -> cr3lab::Result<Report> {
    let (ws, _, sd) = setup(cfg, false)?;
    let mut rep = Report::new("verify_commutation", &cfg.model.label(), cfg.n, cfg.seed);
    let tol = if cfg.is_perturbed() { 5e-5 } else { 1e-8 };
    let deg = if cfg.is_perturbed() { 2 } else { 5 };
    let mut worst = [0.0_f64; 3];
    for f in sampling::random_fields(cfg.seed ^ 0xc0, deg, 20) {
        let c = operators::check_commutation(&ws, &sd, &Weighted::scalar(f));
        for (w, r) in worst.iter_mut().zip(c.relative) {
            *w = w.max(r);
        }
    }
    rep.push(
        "relation C,01 - C,10 (20 random scalars)",
        "eq 6",
        worst[0],
        tol,
    );
    rep.push(
        "relation C,01b - C,1b0 (20 random scalars)",
        "eq 6",
        worst[1],
        tol,
    );
    rep.push(
        "relation C,11b - C,1b1 (20 random scalars)",
        "eq 6",
        worst[2],
        tol,
    );
    let c = operators::check_commutation(&ws, &sd, &Weighted::new(sd.a11.clone(), 2));
    rep.push(
        "torsion relation A11,11b - A11,1b1 = iA11,0 + 2RA11",
        "eq 6",
        c.relative[2],
        tol,
    );
    Ok(rep)
}

fn verify_transforms(cfg: &RunConfig) -> cr3lab::Result<Report> {
    // the transform suite always compares a base structure with its rescale
    let base_model = match &cfg.model {
        ModelSpec::Perturbed { base: Some(b), .. } => (**b).clone(),
        _ => ModelSpec::Sphere,
    };
    let (lam_eps, lam_g) = match &cfg.model {
        ModelSpec::Perturbed { eps, g, .. } => (*eps, g.clone()),
        _ => (cfg.eps, ExponentSpec::Named("re_zwbar".into())),
    };
    let ws = Workspace::new(cfg.cap.unwrap_or(12), cfg.seed)?;
    let opts = SolveOptions {
        exp_order: cfg.exp_order,
        ..SolveOptions::default()
    };
    let base = structures::model_structure(&ws, &base_model, &opts)?;
    let lambda = lam_g.to_field()?.scale(C::new(lam_eps, 0.0)).re();
    let cf = structures::rescale_with_lambda(&ws, &base.coframe, &lambda, &opts)?;
    let tilde = structures::solve_structure(&ws, &cf, &opts)?;
    let f = sampling::named_exponent("zzbar").expect("named exponent exists");
    let t = operators::check_transformations(&ws, &base, &tilde, &lambda, &f)?;
    let mut rep = Report::new("verify_transforms", &cfg.model.label(), cfg.n, cfg.seed);
    for row in &t.rows {
        let anchor = match row.name.as_str() {
            "w1_law" => "eq 5",
            "w1_law_restated" => "eq 0c",
            "p1_covariance" | "p0_covariance" => "eq A",
            "q_law" => "eq 0b",
            _ => "transform",
        };
        rep.push(&row.name, anchor, row.max_residual, 1e-5);
    }
    rep.push(
        "measured Q-law coefficient minus 3",
        "eq 0b",
        t.q_law_coefficient - 3.0,
        1e-3,
    );
    Ok(rep)
}

fn verify_bochner(cfg: &RunConfig) -> cr3lab::Result<Report> {
    let (ws, _, sd) = setup(cfg, false)?;
    let mut rep = Report::new("verify_bochner", &cfg.model.label(), cfg.n, cfg.seed);
    let tol = if cfg.is_perturbed() { 1e-4 } else { 1e-5 };
    let sig = hodge::construct_sigma(&ws, &sd, 1e-6)?;
    let dec = hodge::decompose_sigma(&ws, &sd, &sig.sigma, cfg.n)?;
    let b = analysis::check_bochner_26a(&ws, &sd, &dec, &Field::zero(), 1e-4)?;
    rep.push("Bochner equality", "eq 26A", b.residual, tol);
    rep.push("intermediate torsion pairing", "eq 28A", b.eq_28a, 1e-5);
    rep.push("intermediate Paneitz pairing", "eq 29A", b.eq_29a, 1e-5);
    rep.push(
        "pairing identity (all f)",
        "eq 29A",
        b.eq_29a_universal,
        1e-5,
    );
    let (q, _) = structures::q_curvature(&ws, &sd);
    let bb = analysis::check_bochner_2018bb(&ws, &sd, &dec, &dec.u(), &q);
    rep.push("Bochner equality with Q", "eq 2018BB", bb.residual, tol);
    rep.push("intermediate curvature split", "eq 34", bb.eq_34, 1e-5);
    rep.push("intermediate W1 pairing", "eq 30A", bb.eq_30a, 1e-5);
    rep.push("intermediate Reeb transfer", "eq 31A", bb.eq_31a, 1e-5);
    // standalone versions on a synthetic harmonic form
    let raw = operators::ZeroOneForm::new(
        sampling::random_fields(cfg.seed ^ 0x31, 4, 1)
            .pop()
            .expect("one field"),
    );
    let sdec = hodge::kohn_decompose(&ws, &sd, &raw, cfg.n.min(6))?;
    let mut worst29 = 0.0_f64;
    let mut worst31 = 0.0_f64;
    for f in sampling::random_real_fields(cfg.seed ^ 0x32, 4, 5) {
        worst29 = worst29.max(analysis::check_29a_standalone(&ws, &sd, &f, &sdec.gamma));
        worst31 = worst31.max(analysis::check_31a_standalone(&ws, &sd, &f, &sdec.gamma));
    }
    rep.push(
        "standalone pairing, synthetic harmonic form",
        "eq 29A",
        worst29,
        1e-5,
    );
    rep.push(
        "standalone Reeb transfer, synthetic harmonic form",
        "eq 31A",
        worst31,
        1e-5,
    );
    Ok(rep)
}

fn verify_convexity(cfg: &RunConfig) -> cr3lab::Result<Report> {
    let mut rep = Report::new("verify_convexity", &cfg.model.label(), cfg.n, cfg.seed);
    let vals = sampling::random_reals(cfg.seed ^ 0x41, -1.0, 1.0, 700);
    let mut worst_gap = 0.0_f64;
    let mut agree = true;
    for i in 0..100 {
        let v = &vals[7 * i..7 * i + 7];
        let c0 = 0.5 + 0.5 * v[4].abs();
        let c1 = 0.5 * v[5].abs();
        let a = if i % 10 == 0 {
            -c1 * v[2] / (2.0 * c0)
        } else {
            v[0]
        };
        let p = analysis::ConvexityPoint {
            r: 1.0 + v[6],
            a11: C::new(a, v[1]),
            a11_1b: C::new(v[2], v[3]),
            c0,
            c1,
        };
        let verdict = analysis::is_convex(&p);
        worst_gap = worst_gap.max(verdict.route_gap);
        if verdict.margin.abs() > 1e-4 {
            agree &= verdict.pinched == verdict.phase_worst;
        }
        if verdict.pinched {
            agree &= verdict.family_sampled;
        }
    }
    rep.push(
        "closed-form vs grid-search maximum (100 points)",
        "eq 41a vs 41b",
        worst_gap,
        1e-6,
    );
    rep.push_verdict(
        "pinching agrees with sampled form positivity",
        "lemma l6 / eq 33",
        agree,
    );
    // the worked example: R straddling the aligned-phase bound
    let p = analysis::ConvexityPoint {
        r: 0.71,
        a11: C::new(0.0, 0.4),
        a11_1b: C::new(0.0, 0.3),
        c0: 0.5,
        c1: 0.5,
    };
    rep.push_verdict(
        "R = 0.71 > 0.7 is convex",
        "eq 33",
        analysis::is_convex(&p).pinched,
    );
    let p2 = analysis::ConvexityPoint { r: 0.69, ..p };
    rep.push_verdict(
        "R = 0.69 < 0.7 is not convex",
        "eq 33",
        !analysis::is_convex(&p2).pinched,
    );
    Ok(rep)
}

fn cmd_spectrum(cfg: &RunConfig) -> cr3lab::Result<Report> {
    let (ws, _, sd) = setup(cfg, true)?;
    let n = cfg.n.min(8);
    let m = spectral::assemble(&ws, &sd, n)?;
    let rep_s = spectral::eigensolve(&m, 1e-6)?;
    let mut rep = Report::new("spectrum", &cfg.model.label(), n, cfg.seed);
    let sym_tol = if cfg.is_perturbed() {
        1e-6 * m.max_entry
    } else {
        1e-8
    };
    rep.push(
        "operator matrix symmetry",
        "P0 self-adjoint",
        m.symmetry_defect,
        sym_tol,
    );
    rep.push(
        "quadratic form route agreement",
        "eq 10",
        m.eq10_defect,
        sym_tol,
    );
    rep.push(
        "spectrum floor (nonnegativity)",
        "eq 41",
        (-rep_s.eigenvalues[0]).max(0.0),
        if cfg.is_perturbed() { 1e-6 } else { 1e-9 },
    );
    let crph = spectral::crph_basis(n);
    rep.push_verdict(
        &format!(
            "kernel dimension {} contains CR-pluriharmonic count {}",
            rep_s.kernel_dim,
            crph.len()
        ),
        "eq 2018C",
        rep_s.kernel_dim >= crph.len(),
    );
    if !matches!(cfg.model, ModelSpec::LeftInvariant { .. }) {
        let basis = spectral::real_basis(n);
        let mut span_b = nalgebra::DMatrix::zeros(basis.len(), crph.len());
        for (j, f) in crph.iter().enumerate() {
            let (coords, _) = spectral::project_to_basis(&ws, &sd, &m, &basis, f);
            span_b.set_column(j, &coords);
        }
        let span_a = rep_s.vectors.columns(0, rep_s.kernel_dim).into_owned();
        let angles = spectral::principal_angles(&m.g, &span_a, &span_b);
        rep.push(
            "principal angle to CR-pluriharmonic space",
            "eq 2018C",
            angles[0],
            1e-6,
        );
    }
    rep.push(
        "spectral gap Lambda positive",
        "eq 41",
        (-rep_s.lambda).max(0.0),
        1e-12,
    );
    // eigenvalue bound via the pipeline data
    let sig = hodge::construct_sigma(&ws, &sd, 1e-6)?;
    let dec = hodge::decompose_sigma(&ws, &sd, &sig.sigma, n)?;
    let (q, _) = structures::q_curvature(&ws, &sd);
    let basis = spectral::real_basis(n);
    let bound = spectral::check_bound_2018h(&ws, &sd, &m, &rep_s, &basis, &dec.u(), &q);
    match bound.verdict {
        spectral::BoundVerdict::HypothesisUnmet => {
            rep.push_verdict("(1/2,1/2)-convexity hypothesis", "eq 33", false);
        }
        _ => {
            rep.push(
                "eigenvalue bound margin (negative part)",
                "eq 2018H",
                (-bound.margin).max(0.0),
                1e-10,
            );
            rep.push("bound proof chain", "eq 2018H", bound.chain_residual, 1e-4);
        }
    }
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| cr3lab::Error::Config(format!("cannot create {dir:?}: {e}")))?;
        let mut csv = String::from("index,eigenvalue\n");
        for (i, e) in rep_s.eigenvalues.iter().enumerate() {
            csv.push_str(&format!("{i},{e:e}\n"));
        }
        std::fs::write(
            dir.join(format!("spectrum_{}.csv", model_slug(&cfg.model))),
            csv,
        )
        .map_err(|e| cr3lab::Error::Config(format!("cannot write spectrum: {e}")))?;
        if matches!(cfg.model, ModelSpec::Sphere) {
            let mut table = String::from("n,lambda,kernel_dim\n");
            for nn in [4usize, 6, 8] {
                if nn <= ws.cap() {
                    let mm = spectral::assemble(&ws, &sd, nn)?;
                    let rr = spectral::eigensolve(&mm, 1e-6)?;
                    table.push_str(&format!("{nn},{:e},{}\n", rr.lambda, rr.kernel_dim));
                }
            }
            std::fs::write(dir.join("lambda_table_sphere.csv"), table)
                .map_err(|e| cr3lab::Error::Config(format!("cannot write table: {e}")))?;
        }
    }
    Ok(rep)
}

fn cmd_pipeline(cfg: &RunConfig, f_name: &str) -> cr3lab::Result<Report> {
    let (ws, opts, sd) = setup(cfg, false)?;
    let f = sampling::named_exponent(f_name)
        .ok_or_else(|| cr3lab::Error::Config(format!("unknown exponent '{f_name}'")))?;
    let mut rep = Report::new("pipeline", &cfg.model.label(), cfg.n, cfg.seed);
    let tol = cfg.tol_exact();
    let sig = hodge::construct_sigma(&ws, &sd, tol.max(1e-6))?;
    rep.push(
        "sigma primitive residual",
        "lemma l2",
        sig.d_residual,
        tol.max(1e-6),
    );
    let dec = hodge::decompose_sigma(&ws, &sd, &sig.sigma, cfg.n)?;
    rep.push(
        "Kohn splitting harmonic residual",
        "eq 2",
        dec.harmonic_residual,
        1e-6,
    );
    rep.push(
        "range orthogonality",
        "Kohn decomposition",
        dec.orthogonality,
        1e-8,
    );
    let w1_res = hodge::check_w1_identity(&ws, &sd, &dec);
    rep.push(
        "pseudo-Einstein expression",
        "eq 0",
        w1_res,
        if cfg.is_perturbed() { 1e-5 } else { 1e-9 },
    );
    let cand = hodge::pe_candidate(&ws, &sd, &dec, &f, &opts)?;
    rep.push(
        "defining equation residual",
        "eq 7",
        cand.eq7_residual,
        if cfg.is_perturbed() { 1e-5 } else { 1e-9 },
    );
    rep.push(
        "pseudo-Einstein tensor of the candidate",
        "theorem t1",
        cand.w1_norm,
        if cfg.is_perturbed() { 1e-4 } else { 1e-9 },
    );
    let eq24 = hodge::check_eq24(&ws, &sd, &dec, &f, 1e-4)?;
    rep.push(
        "fourth-order consequence",
        "eq 24",
        eq24,
        if cfg.is_perturbed() { 1e-4 } else { 1e-9 },
    );
    if sd.is_sasakian(&ws, 1e-8) {
        let (g10, eq8) = hodge::check_torsion_free_gamma(&ws, &sd, &dec, 1e-8)?;
        rep.push("Reeb-parallel harmonic part", "corollary c2", g10, 1e-8);
        rep.push("gradient identity", "eq 8", eq8, 1e-8);
    }
    Ok(rep)
}

fn run() -> cr3lab::Result<bool> {
    let cli = Cli::parse();
    let cfg = merge_config(&cli)?;
    let report = match &cli.command {
        Command::Structure => cmd_structure(&cfg)?,
        Command::Verify { suite } => cmd_verify(&cfg, *suite)?,
        Command::Spectrum => cmd_spectrum(&cfg)?,
        Command::Pipeline { f } => cmd_pipeline(&cfg, f)?,
    };
    write_report(&cfg, &report)?;
    Ok(report.passed)
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
