//! Implementations of the four subcommands. Each returns Ok(overall) so
//! main can map pass/fail onto exit codes, and Err for input problems.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, ensure, Context as _};
use rand::SeedableRng as _;
use rand_chacha::ChaCha8Rng;

use dissenc::channels::{nominal_gauge_vector, MAX_DENSE_QUBITS};
use dissenc::codes::builtin;
use dissenc::{
    basin_dimension, build_toric, check_e1, check_e3, check_order_robustness,
    check_plan_symplectic, check_quasi_locality, check_range_property, enumerate_branches,
    evolve_cde, parallel_schedule, random_density, synthesize_plan, tableau_for_plan, to_json,
    toric_plan, trace_distance, verify_ftde, CheckResult, CodeFile, ComposedEncoder,
    DensityMatrix, EncoderPlan, EnumerationLimits, LatticeFile, PlanFile, QubitState,
    ReferenceEncoding, StateVector, Tolerances, ToricLattice, VerificationReport,
};

use crate::{SimulateArgs, SynthesizeArgs, ToricArgs, VerifyArgs};

/// Upload states exercised by the tableau battery of the toric command.
const TORIC_UPLOADS: [&str; 6] = ["00", "0+", "+0", "++", "0-", "1+"];

fn load_source(source: &str) -> anyhow::Result<(EncoderPlan, Option<ToricLattice>)> {
    if let Some(rest) = source.strip_prefix("toric:") {
        let l: usize = rest
            .parse()
            .with_context(|| format!("torus size {rest:?}"))?;
        let (lat, _) = build_toric(l)?;
        let plan = toric_plan(&lat)?;
        return Ok((plan, Some(lat)));
    }
    let name = source.strip_prefix("builtin:").unwrap_or(source);
    if let Some(b) = builtin(name) {
        return Ok((synthesize_plan(&b.code)?, None));
    }
    if source.starts_with("builtin:") {
        bail!("unknown builtin code {name:?}");
    }
    let text = std::fs::read_to_string(source)
        .with_context(|| format!("reading code file {source}"))?;
    let file: CodeFile =
        serde_json::from_str(&text).with_context(|| format!("parsing code file {source}"))?;
    Ok((synthesize_plan(&file.to_code()?)?, None))
}

fn load_plan(plan: Option<&PathBuf>, code: Option<&str>) -> anyhow::Result<EncoderPlan> {
    if let Some(path) = plan {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading plan file {}", path.display()))?;
        let file: PlanFile = serde_json::from_str(&text)
            .with_context(|| format!("parsing plan file {}", path.display()))?;
        return Ok(file.to_plan()?);
    }
    if let Some(source) = code {
        return Ok(load_source(source)?.0);
    }
    bail!("pass --plan FILE or --code SOURCE");
}

fn tolerances(tol: Option<f64>) -> Tolerances<f64> {
    let mut out = Tolerances::default();
    if let Some(t) = tol {
        out.channel = t;
    }
    out
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn print_report(report: &VerificationReport) {
    let width = report
        .checks()
        .iter()
        .map(|c| c.name.len())
        .max()
        .unwrap_or(0);
    for c in report.checks() {
        let verdict = if c.pass { "pass" } else { "FAIL" };
        println!("{verdict}  {:width$}  residual {:.3e}", c.name, c.residual);
    }
    println!(
        "overall: {}",
        if report.overall() { "pass" } else { "FAIL" }
    );
}

pub fn synthesize(args: &SynthesizeArgs) -> anyhow::Result<bool> {
    let (plan, _) = load_source(&args.code)?;
    let dim = basin_dimension(plan.basin_rz(), plan.basin_rx());
    println!(
        "code {}: n = {}, r = {}, m = {}",
        plan.code().name(),
        plan.n(),
        plan.r(),
        plan.m()
    );
    println!(
        "basin log2 dimension {} ({} free gauge qubits)",
        dim.log2_dimension,
        plan.nominal_gauge().free_count()
    );
    println!("nominal gauge state {}", plan.nominal_gauge().pattern_string());
    if plan.r() == 0 {
        println!("warning: no stabilizers, the plan is the identity channel");
    }
    if let Some(out) = &args.out {
        write_text(out, &to_json(&PlanFile::from_plan(&plan)?)?)?;
        println!("plan written to {}", out.display());
    }
    Ok(true)
}

/// Spanning set of logical inputs: the full per-qubit operator basis when
/// small, four uniform product states otherwise.
fn logical_probes(m: usize) -> anyhow::Result<Vec<(String, DensityMatrix<f64>)>> {
    if m <= 3 {
        return Ok(dissenc::logical_density_basis::<f64>(m)?);
    }
    ['0', '1', '+', 'i']
        .iter()
        .map(|&c| {
            let spec: String = std::iter::repeat(c).take(m).collect();
            Ok((spec.clone(), upload_density(&spec, m)?))
        })
        .collect()
}

fn upload_density(spec: &str, m: usize) -> anyhow::Result<DensityMatrix<f64>> {
    ensure!(
        spec.chars().count() == m,
        "input spec {spec:?} has {} symbols for m = {m}",
        spec.chars().count()
    );
    let qubits: Vec<QubitState> = spec
        .chars()
        .map(|c| QubitState::from_symbol(c).ok_or_else(|| anyhow!("unknown preparation symbol {c:?}")))
        .collect::<Result<_, _>>()?;
    Ok(StateVector::<f64>::product(&qubits)?.density())
}

pub fn verify(args: &VerifyArgs) -> anyhow::Result<bool> {
    let plan = load_plan(args.plan.as_ref(), args.code.as_deref())?;
    let tol = tolerances(args.tol);
    let mut report = check_plan_symplectic(&plan, args.ordered)?;
    if plan.n() <= MAX_DENSE_QUBITS {
        let logicals = logical_probes(plan.m())?;
        let gauges = vec![(
            "nominal".to_string(),
            nominal_gauge_vector::<f64>(plan.nominal_gauge())?.density(),
        )];
        report.merge(verify_ftde(&plan, &logicals, &gauges, &tol)?);
        report.merge(check_range_property(&plan, 3, args.seed, &tol)?);
        if !args.ordered {
            let orderings = if plan.n() <= 5 { 24 } else { 12 };
            report.merge(check_order_robustness(&plan, orderings, args.seed, &tol)?);
        }
    } else {
        println!(
            "note: {} qubits exceed the dense limit of {MAX_DENSE_QUBITS}, symplectic checks only",
            plan.n()
        );
    }
    print_report(&report);
    if let Some(out) = &args.out {
        write_text(out, &to_json(&report)?)?;
    }
    Ok(report.overall())
}

fn overlap(a: &DensityMatrix<f64>, b: &DensityMatrix<f64>) -> f64 {
    let (ma, mb) = (a.matrix(), b.matrix());
    let mut sum = 0.0;
    for i in 0..ma.nrows() {
        for j in 0..ma.ncols() {
            sum += (ma[(i, j)] * mb[(j, i)]).re;
        }
    }
    sum
}

fn parse_grid(spec: Option<&str>) -> anyhow::Result<Vec<f64>> {
    match spec {
        None => Ok((0..=50).map(f64::from).collect()),
        Some(s) => s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .with_context(|| format!("time grid entry {tok:?}"))
            })
            .collect(),
    }
}

fn simulate_dense(plan: &EncoderPlan, spec: &str, args: &SimulateArgs) -> anyhow::Result<()> {
    let rho_l = upload_density(spec, plan.m())?;
    let sigma = nominal_gauge_vector::<f64>(plan.nominal_gauge())?.density();
    let mut rho = dissenc::embed_logical(&rho_l, &sigma, plan)?;
    let reference = ReferenceEncoding::<f64>::new(plan)?;
    let target = reference.encode(&rho_l)?;
    let tol = Tolerances::<f64>::default();

    if args.cde {
        let grid = parse_grid(args.t_grid.as_deref())?;
        let encoder = ComposedEncoder::from_plan(plan, None)?;
        println!("{:>10}  {:>18}  {:>18}", "t", "fidelity", "distance");
        let mut last = rho.clone();
        for &t in &grid {
            last = evolve_cde(&encoder, &rho, t, &tol)?;
            println!(
                "{t:>10.3}  {:>18.12}  {:>18.12}",
                overlap(&target, &last),
                trace_distance(&last, &target)?
            );
        }
        rho = last;
    } else {
        let name_width = plan.n().max("stabilizer".len());
        println!(
            "{:>4}  {:name_width$}  {:>18}  {:>18}",
            "step", "stabilizer", "fidelity", "min <S>"
        );
        let min_expectation = |rho: &DensityMatrix<f64>, upto: usize| -> anyhow::Result<f64> {
            let mut min = f64::INFINITY;
            for step in &plan.steps()[..upto] {
                min = min.min(rho.expectation(&step.stabilizer)?.re);
            }
            Ok(if min.is_finite() { min } else { f64::NAN })
        };
        println!(
            "{:>4}  {:name_width$}  {:>18.12}  {:>18}",
            0,
            "(input)",
            overlap(&target, &rho),
            "-"
        );
        for (k, step) in plan.steps().iter().enumerate() {
            let map = dissenc::EncodingMap::new(step.stabilizer.clone(), step.correction.clone())?;
            rho = map.apply(&rho)?;
            println!(
                "{:>4}  {:name_width$}  {:>18.12}  {:>18.12}",
                k + 1,
                step.stabilizer.to_string(),
                overlap(&target, &rho),
                min_expectation(&rho, k + 1)?
            );
        }
    }

    if let Some(path) = &args.dump_state {
        let description = format!("{} after simulate, upload {spec}", plan.code().name());
        dissenc::write_state_dump(path, &rho, &description)?;
        println!("state written to {}", path.display());
    }
    Ok(())
}

fn simulate_tableau(plan: &EncoderPlan, spec: &str, args: &SimulateArgs) -> anyhow::Result<()> {
    ensure!(
        args.dump_state.is_none(),
        "--dump-state needs the dense backend"
    );
    let initial = tableau_for_plan(plan, spec)?;
    let limits = EnumerationLimits {
        seed: args.seed,
        ..EnumerationLimits::default()
    };
    let name_width = plan.n().max("stabilizer".len());
    println!(
        "{:>4}  {:name_width$}  {:>8}  {:>9}  {:>8}",
        "step", "stabilizer", "branches", "coverage", "min <S>"
    );
    let mut set = enumerate_branches(&initial, &[], &limits)?;
    for k in 1..=plan.steps().len() {
        set = enumerate_branches(&initial, &plan.steps()[..k], &limits)?;
        let mut min_measured = 1i8;
        for (_, leaf) in &set.leaves {
            for step in &plan.steps()[..k] {
                min_measured = min_measured.min(leaf.expectation(&step.stabilizer)?);
            }
        }
        println!(
            "{k:>4}  {:name_width$}  {:>8}  {:>9.6}  {min_measured:>8}",
            plan.steps()[k - 1].stabilizer.to_string(),
            set.leaves.len(),
            set.coverage
        );
    }
    for (i, (lx, lz)) in plan.logical_x().iter().zip(plan.logical_z()).enumerate() {
        let mean = |op| -> anyhow::Result<f64> {
            let mut sum = 0.0;
            for (p, leaf) in &set.leaves {
                sum += p * f64::from(leaf.expectation(op)?);
            }
            Ok(sum)
        };
        println!("logical {i}: <X> = {:+.6}, <Z> = {:+.6}", mean(lx)?, mean(lz)?);
    }
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> anyhow::Result<bool> {
    let plan = load_plan(args.plan.as_ref(), args.code.as_deref())?;
    let spec = args
        .input
        .clone()
        .unwrap_or_else(|| "0".repeat(plan.m()));
    let use_tableau = args.tableau || (!args.dense && plan.n() > MAX_DENSE_QUBITS);
    if use_tableau {
        ensure!(
            !args.cde,
            "continuous-time mode is dense only; drop --tableau or shrink the register"
        );
        simulate_tableau(&plan, &spec, args)?;
    } else {
        ensure!(
            plan.n() <= MAX_DENSE_QUBITS,
            "{} qubits exceed the dense limit of {MAX_DENSE_QUBITS}; rerun with --tableau",
            plan.n()
        );
        simulate_dense(&plan, &spec, args)?;
    }
    Ok(true)
}

/// Nominal gauge state with the free slots replaced by seeded random
/// single-qubit mixtures.
fn seeded_gauge_state(plan: &EncoderPlan, seed: u64) -> anyhow::Result<DensityMatrix<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nominal = plan.nominal_gauge();
    let mut sigma = DensityMatrix::<f64>::basis(0, 0)?;
    for (j, basis) in nominal.pattern().iter().enumerate() {
        let factor = if nominal.free_flags()[j] {
            random_density::<f64>(1, 2, &mut rng)?
        } else {
            let q = QubitState::from_symbol(basis.symbol())
                .expect("gauge patterns use preparation symbols");
            StateVector::<f64>::product(&[q])?.density()
        };
        sigma = sigma.tensor(&factor)?;
    }
    Ok(sigma)
}

pub fn toric(args: &ToricArgs) -> anyhow::Result<bool> {
    let (lat, _) = build_toric(args.l)?;
    let plan = toric_plan(&lat)?;
    let tol = tolerances(args.tol);
    println!(
        "torus L = {}: n = {}, r = {}, m = {}",
        args.l,
        plan.n(),
        plan.r(),
        plan.m()
    );

    let mut report = check_e1(&plan, true)?;
    report.merge(check_e3(&plan)?);
    let neighborhoods: Vec<Vec<usize>> = lat
        .plaquettes()
        .iter()
        .chain(lat.vertices())
        .map(|set| set.to_vec())
        .collect();
    report.merge(check_quasi_locality(&plan, &neighborhoods));

    let dense = if args.dense {
        true
    } else if args.tableau {
        false
    } else {
        plan.n() <= MAX_DENSE_QUBITS
    };
    if dense {
        ensure!(
            plan.n() <= MAX_DENSE_QUBITS,
            "L = {} needs {} qubits, past the dense limit of {MAX_DENSE_QUBITS}; rerun with --tableau",
            args.l,
            plan.n()
        );
        let logicals = logical_probes(plan.m())?;
        let gauges = vec![
            (
                "nominal".to_string(),
                nominal_gauge_vector::<f64>(plan.nominal_gauge())?.density(),
            ),
            ("random_free".to_string(), seeded_gauge_state(&plan, args.seed)?),
        ];
        report.merge(verify_ftde(&plan, &logicals, &gauges, &tol)?);
        report.merge(check_range_property(&plan, 3, args.seed, &tol)?);
    } else {
        let limits = EnumerationLimits {
            seed: args.seed,
            ..EnumerationLimits::default()
        };
        let mut violations = 0usize;
        let mut leaves_total = 0usize;
        for spec in TORIC_UPLOADS {
            let initial = tableau_for_plan(&plan, spec)?;
            let set = enumerate_branches(&initial, plan.steps(), &limits)?;
            leaves_total += set.leaves.len();
            let symbols: Vec<char> = spec.chars().collect();
            for (_, leaf) in &set.leaves {
                for step in plan.steps() {
                    if leaf.expectation(&step.stabilizer)? != 1 {
                        violations += 1;
                    }
                }
                for (i, &symbol) in symbols.iter().enumerate() {
                    let (ex, ez) = match symbol {
                        '0' => (0, 1),
                        '1' => (0, -1),
                        '+' => (1, 0),
                        '-' => (-1, 0),
                        _ => unreachable!("upload table uses stabilizer symbols"),
                    };
                    if leaf.expectation(&plan.logical_x()[i])? != ex
                        || leaf.expectation(&plan.logical_z()[i])? != ez
                    {
                        violations += 1;
                    }
                }
            }
        }
        report.push(CheckResult::exact(
            "finite_time_encoding_tableau",
            violations,
            format!(
                "{} upload states, {leaves_total} branch leaves",
                TORIC_UPLOADS.len()
            ),
        ));
    }

    let schedule = parallel_schedule(&plan)?;
    print_report(&report);
    println!(
        "parallel schedule depth {} with layer sizes {:?}",
        schedule.depth(),
        schedule.layers().iter().map(Vec::len).collect::<Vec<_>>()
    );
    if let Some(out) = &args.out {
        write_text(out, &to_json(&LatticeFile::new(&lat, &plan)?)?)?;
        println!("lattice bundle written to {}", out.display());
    }
    Ok(report.overall())
}
