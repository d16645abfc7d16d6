use lmg_core::classical::{
    classify_sector, find_fixed_points, trajectory_branches, ClassicalTrajectory, CriticalKind, DosModel, PhasePoint,
    DEFAULT_BRANCH_SAMPLES,
};
use lmg_core::coherent::CoherentState;
use lmg_core::dynamics::{evolve_quantum, run_quench, scenario_builder, QuenchConfig, ScenarioKind, TwaConfig};
use lmg_core::phase_space::{
    husimi_of_state, wehrl_sweep, GridSpec, McConfig, PhaseSpaceState, WehrlConvention, WehrlSweep,
};
use lmg_core::spectral::{
    avoided_crossing_pairs, locate_minimum_gap, predict_crossing_coupling, sweep_spectra, CrossingKind, GapPair,
    SpectralData,
};
use lmg_core::spin::{CouplingParams, Parity, SpinSpace};
use serde_json::json;

use crate::output::{Products, Session, Table};
use crate::{row, CliError, RunConfig};

type Res<T> = Result<T, CliError>;

pub fn dispatch(s: &mut Session) -> Res<Products> {
    match s.subcommand {
        "spectrum" => spectrum(s),
        "sweep" => sweep(s),
        "crossings" => crossings(s),
        "dos" => dos(s),
        "classify" => classify(s),
        "husimi" => husimi(s),
        "wehrl" => wehrl(s),
        "dynamics" => dynamics(s),
        other => Err(CliError::config(format!("unknown subcommand {other}"))),
    }
}

fn core<T>(s: &Session, r: lmg_core::Result<T>) -> Res<T> {
    r.map_err(|e| CliError::from_core(s.current_stage(), e))
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Res<T> {
    v.ok_or_else(|| CliError::config(format!("--{flag} is required")))
}

fn space(c: &RunConfig) -> Res<SpinSpace> {
    SpinSpace::new(c.j.unwrap_or(100.0)).map_err(|e| CliError::from_core("config", e))
}

fn ratio_only(c: &RunConfig) -> Res<f64> {
    if c.gamma_y.is_some() {
        return Err(CliError::config("this subcommand takes --ratio, not --gy".into()));
    }
    need(c.ratio, "ratio")
}

/// γy from exactly one of --gy and --ratio.
fn gamma_y(c: &RunConfig, gamma_x: f64) -> Res<f64> {
    match (c.gamma_y, c.ratio) {
        (Some(_), Some(_)) => Err(CliError::config("give either --gy or --ratio, not both".into())),
        (Some(g), None) => Ok(g),
        (None, Some(r)) => Ok(r * gamma_x),
        (None, None) => Err(CliError::config("one of --gy or --ratio is required".into())),
    }
}

fn couplings(c: &RunConfig) -> Res<CouplingParams> {
    let gx = need(c.gamma_x, "gx")?;
    let gy = gamma_y(c, gx)?;
    CouplingParams::new(c.epsilon0.unwrap_or(1.0), gx, gy).map_err(|e| CliError::from_core("config", e))
}

fn parity(c: &RunConfig) -> Res<Option<Parity>> {
    c.parity.map(|p| Parity::from_sign(p).map_err(|e| CliError::from_core("config", e))).transpose()
}

/// `steps` points from lo to hi inclusive.
fn linspace(lo: f64, hi: f64, steps: usize) -> Res<Vec<f64>> {
    if steps == 0 || !(lo.is_finite() && hi.is_finite()) || (steps == 1 && lo != hi) {
        return Err(CliError::config(format!("bad grid [{lo}, {hi}] with {steps} points")));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect())
}

fn gamma_grid(c: &RunConfig) -> Res<Vec<f64>> {
    linspace(need(c.gamma_min, "gamma-min")?, need(c.gamma_max, "gamma-max")?, need(c.gamma_steps, "gamma-steps")?)
}

fn coupling_meta(t: &mut Table, space: &SpinSpace, c: &CouplingParams) {
    t.meta("j", space.j()).meta("epsilon0", c.epsilon0).meta("gamma_x", c.gamma_x).meta("gamma_y", c.gamma_y);
}

fn orbit_rows(t: &mut Table, orbits: &[ClassicalTrajectory], offset: usize) {
    for (i, o) in orbits.iter().enumerate() {
        for (n, p) in o.samples.iter().enumerate() {
            t.push(row![o.epsilon, offset + i, o.branch.label(), n, p.q, p.p]);
        }
    }
}

const ORBIT_COLUMNS: [&str; 6] = ["epsilon", "orbit", "branch", "index", "q", "p"];

fn orbit_table(name: &str, orbits: &[ClassicalTrajectory]) -> Table {
    let n = orbits.iter().map(|o| o.samples.len()).sum();
    let mut t = Table::new(name, &ORBIT_COLUMNS, n);
    orbit_rows(&mut t, orbits, 0);
    t
}

fn spectrum(s: &mut Session) -> Res<Products> {
    let cfg = s.config.clone();
    let sp = space(&cfg)?;
    let c = couplings(&cfg)?;
    s.stage("spectrum");
    let spec = core(s, SpectralData::compute(&sp, &c))?;
    let mut t = Table::new("spectrum", &["parity", "k", "energy", "energy_over_j", "jz_over_j"], sp.dim());
    coupling_meta(&mut t, &sp, &c);
    for p in Parity::both() {
        let sec = spec.sector(p);
        for k in 1..=sec.len() {
            let e = sec.energy(k);
            t.push(row![p.sign(), k, e, e / (sp.j() * c.epsilon0), spec.jz_over_j(p, k)]);
        }
    }
    Ok(Products { tables: vec![t], ..Default::default() })
}

fn sweep(s: &mut Session) -> Res<Products> {
    let cfg = s.config.clone();
    let sp = space(&cfg)?;
    let ratio = ratio_only(&cfg)?;
    let e0 = cfg.epsilon0.unwrap_or(1.0);
    let gammas = gamma_grid(&cfg)?;
    s.stage("spectrum");
    let all = core(s, sweep_spectra(&sp, e0, ratio, &gammas))?;
    let cols = ["gamma_x", "gamma_y", "parity", "k", "energy", "energy_over_j"];
    let mut t = Table::new("sweep", &cols, gammas.len() * sp.dim());
    t.meta("j", sp.j()).meta("epsilon0", e0).meta("ratio", ratio).meta("gamma_steps", gammas.len());
    for spec in &all {
        for p in Parity::both() {
            let sec = spec.sector(p);
            for k in 1..=sec.len() {
                let e = sec.energy(k);
                t.push(row![spec.couplings.gamma_x, spec.couplings.gamma_y, p.sign(), k, e, e / (sp.j() * e0)]);
            }
        }
    }
    Ok(Products { tables: vec![t], ..Default::default() })
}

/// Energy window (ε units) for pair selection: the flags, else the
/// intermediate window between the ESQPT and ε = −1.
fn pair_window(cfg: &RunConfig, c: &CouplingParams) -> (f64, f64) {
    let label = classify_sector(c);
    let lo = cfg.energy_min.or(label.first(CriticalKind::EsqptLogDivergence)).unwrap_or(-1.0 - 1e-9);
    let hi = cfg.energy_max.unwrap_or(-1.0);
    (lo, hi)
}

fn crossings(s: &mut Session) -> Res<Products> {
    let cfg = s.config.clone();
    let sp = space(&cfg)?;
    let ratio = ratio_only(&cfg)?;
    let e0 = cfg.epsilon0.unwrap_or(1.0);
    let ns = cfg.n.clone().filter(|v| !v.is_empty()).ok_or_else(|| CliError::config("--n is required".into()))?;
    let negative = cfg.gamma_x.is_none_or(|g| g < 0.0);
    s.stage("predict");
    let preds =
        ns.iter().map(|&n| core(s, predict_crossing_coupling(&sp, ratio, n, negative))).collect::<Res<Vec<_>>>()?;

    let mut t = Table::new("crossings", &["n", "kind", "product", "gamma_x", "gamma_y"], preds.len());
    t.meta("j", sp.j()).meta("ratio", ratio);
    for p in &preds {
        t.push(row![p.n, p.kind.label(), p.product, p.gamma_x, p.gamma_y]);
    }
    let mut tables = vec![t];

    if cfg.locate.unwrap_or(false) {
        s.stage("locate");
        let half = cfg.gamma_max.zip(cfg.gamma_min).map(|(a, b)| 0.5 * (a - b).abs()).unwrap_or(0.05);
        let cols = ["n", "pair", "parity", "k", "gamma_at_min", "offset", "gap_min", "mean_energy_over_j", "interior"];
        let mut rows = Vec::new();
        for p in &preds {
            let c = core(s, CouplingParams::new(e0, p.gamma_x, p.gamma_y))?;
            let window = pair_window(&cfg, &c);
            let spec = core(s, SpectralData::energies_only(&sp, &c))?;
            let mut pairs: Vec<(GapPair, i32)> = Vec::new();
            match p.kind {
                CrossingKind::Avoided => {
                    for par in Parity::both() {
                        for k in avoided_crossing_pairs(&spec, par, window) {
                            pairs.push((GapPair::SameParity { parity: par, k }, par.sign()));
                        }
                    }
                }
                CrossingKind::Real => {
                    for k in 1..=spec.negative.len().min(spec.positive.len()) {
                        let e = 0.5 * (spec.positive.energy(k) + spec.negative.energy(k)) / (sp.j() * e0);
                        if e > window.0 && e < window.1 {
                            pairs.push((GapPair::CrossParity { k }, 0));
                        }
                    }
                }
            }
            for (pair, sign) in pairs {
                let r = core(s, locate_minimum_gap(&sp, e0, ratio, pair, (p.gamma_x - half, p.gamma_x + half), 1e-7))?;
                let (label, k) = match pair {
                    GapPair::SameParity { k, .. } => ("same_parity", k),
                    GapPair::CrossParity { k } => ("cross_parity", k),
                };
                rows.push(row![
                    p.n,
                    label,
                    sign,
                    k,
                    r.gamma_at_min,
                    r.gamma_at_min - p.gamma_x,
                    r.gap_min,
                    r.mean_energy / (sp.j() * e0),
                    r.interior
                ]);
            }
        }
        let mut m = Table::new("minima", &cols, rows.len());
        m.meta("j", sp.j()).meta("ratio", ratio).meta("half_width", half);
        m.rows = rows;
        tables.push(m);
    }
    Ok(Products { tables, ..Default::default() })
}

fn dos(s: &mut Session) -> Res<Products> {
    let cfg = s.config.clone();
    let sp = space(&cfg)?;
    let c = couplings(&cfg)?;
    let label = classify_sector(&c);
    let ground = label.first(CriticalKind::Ground).unwrap_or(-1.0);
    let steps = cfg.energy_steps.unwrap_or(401);
    let grid = linspace(cfg.energy_min.unwrap_or(ground), cfg.energy_max.unwrap_or(1.0), steps)?;
    s.stage("spectrum");
    let levels: Vec<f64> = core(s, SpectralData::energies_only(&sp, &c))?
        .all_energies()
        .iter()
        .map(|e| e / (sp.j() * c.epsilon0))
        .collect();
    s.stage("dos");
    let model = DosModel::new(&sp, &c);
    let je = sp.j() * c.epsilon0;
    let width = if grid.len() > 1 { grid[1] - grid[0] } else { 0.0 };
    let cols = ["epsilon", "rho_sc", "divergent", "count_sc", "count_quantum", "rho_quantum"];
    let mut t = Table::new("dos", &cols, grid.len());
    coupling_meta(&mut t, &sp, &c);
    t.meta("bin_width", width);
    let mut warnings = Vec::new();
    for &eps in &grid {
        let d = core(s, model.rho(eps * je))?;
        if d.divergent {
            warnings.push(format!("density capped at the divergence ε = {eps}"));
        }
        let below = levels.iter().filter(|&&e| e < eps).count();
        let hist = if width > 0.0 {
            let n = levels.iter().filter(|&&e| e >= eps - 0.5 * width && e < eps + 0.5 * width).count();
            n as f64 / (width * je)
        } else {
            f64::NAN
        };
        t.push(row![eps, d.rho, d.divergent, model.count(eps * je), below, hist]);
    }
    Ok(Products { tables: vec![t], warnings, ..Default::default() })
}

fn classify(s: &mut Session) -> Res<Products> {
    let cfg = s.config.clone();
    let c = couplings(&cfg)?;
    s.stage("classify");
    let label = classify_sector(&c);
    let fps = find_fixed_points(&c);
    let mut crit = Table::new("classify", &["kind", "epsilon"], label.critical_energies.len());
    crit.meta("gamma_x", c.gamma_x).meta("gamma_y", c.gamma_y).meta("sector", format!("{:?}", label.sector));
    crit.meta("degenerate", label.degenerate);
    for ce in &label.critical_energies {
        crit.push(row![format!("{:?}", ce.kind), ce.epsilon]);
    }
    let mut fp = Table::new("fixed_points", &["stability", "q", "p", "energy", "north_pole"], fps.len());
    for f in &fps {
        fp.push(row![format!("{:?}", f.stability), f.location.q, f.location.p, f.energy, f.north_pole]);
    }
    let doc = json!({
        "gamma_x": c.gamma_x,
        "gamma_y": c.gamma_y,
        "sector": format!("{:?}", label.sector),
        "degenerate": label.degenerate,
        "gamma_m": label.gamma_m,
        "gamma_big_m": label.gamma_big_m,
        "critical_energies": label.critical_energies,
        "fixed_points": fps,
    });
    let mut tables = vec![crit, fp];
    if let Some(lo) = cfg.energy_min {
        s.stage("trajectories");
        let energies = linspace(lo, cfg.energy_max.unwrap_or(lo), cfg.energy_steps.unwrap_or(1))?;
        let mut orbits = Vec::new();
        for e in energies {
            orbits.extend(core(s, trajectory_branches(e, &c, DEFAULT_BRANCH_SAMPLES))?);
        }
        tables.push(orbit_table("trajectories", &orbits));
    }
    Ok(Products { tables, documents: vec![("fixed_points".into(), doc)], ..Default::default() })
}

/// Initial point and couplings from --scenario or from --q0/--p0.
fn quench_setup(cfg: &RunConfig, sp: &SpinSpace) -> Res<(CouplingParams, PhasePoint, Option<lmg_core::Scenario>)> {
    if let Some(letter) = cfg.scenario {
        if cfg.q0.is_some() || cfg.p0.is_some() || cfg.gamma_x.is_some() {
            return Err(CliError::config("--scenario fixes the couplings and start; drop --gx/--q0/--p0".into()));
        }
        let kind = ScenarioKind::from_letter(letter).map_err(|e| CliError::from_core("config", e))?;
        let ratio = ratio_only(cfg)?;
        let sc = scenario_builder(kind, sp, ratio).map_err(|e| CliError::from_core("scenario", e))?;
        Ok((sc.couplings, sc.start, Some(sc)))
    } else {
        let c = couplings(cfg)?;
        let start =
            PhasePoint::new(need(cfg.q0, "q0")?, need(cfg.p0, "p0")?).map_err(|e| CliError::from_core("config", e))?;
        Ok((c, start, None))
    }
}

fn husimi(s: &mut Session) -> Res<Products> {
    let cfg = s.config.clone();
    let sp = space(&cfg)?;
    let n = cfg.grid.unwrap_or(201);
    if n < 2 {
        return Err(CliError::config("--grid needs at least 2 points".into()));
    }
    let grid = GridSpec::square(n);
    let evolved = cfg.scenario.is_some() || cfg.q0.is_some() || cfg.time.is_some();
    let (c, state, tag, orbits) = if evolved {
        let (c, start, sc) = quench_setup(&cfg, &sp)?;
        let t = cfg.time.unwrap_or(0.0);
        s.stage("spectrum");
        let spec = core(s, SpectralData::compute(&sp, &c))?;
        let alpha = core(s, CoherentState::from_phase_point(&sp, &start))?;
        s.stage("evolve");
        let evo = core(s, evolve_quantum(&alpha, &spec, &[t]))?;
        let eps = lmg_core::classical::classical_energy(&start, &c);
        let mut orbits = core(s, trajectory_branches(eps, &c, DEFAULT_BRANCH_SAMPLES))?;
        if let Some(p) = sc.and_then(|x| x.partner) {
            if !orbits.iter().any(|o| o == &p) {
                orbits.push(p);
            }
        }
        (c, PhaseSpaceState::from_full(&evo.state_at(t)), format!("t={t}"), orbits)
    } else {
        let c = couplings(&cfg)?;
        let par = parity(&cfg)?.unwrap_or(Parity::Positive);
        let k = match cfg.k.as_deref() {
            Some([k]) => *k,
            _ => return Err(CliError::config("--k takes exactly one level for husimi".into())),
        };
        s.stage("spectrum");
        let spec = core(s, SpectralData::compute(&sp, &c))?;
        if k == 0 || k > spec.sector(par).len() {
            return Err(CliError::config(format!("k = {k} outside 1..={}", spec.sector(par).len())));
        }
        let eps = spec.sector(par).energy(k) / (sp.j() * c.epsilon0);
        let orbits = core(s, trajectory_branches(eps, &c, DEFAULT_BRANCH_SAMPLES))?;
        (c, PhaseSpaceState::from_eigenstate(&spec, par, k), format!("{par}{k}"), orbits)
    };
    s.stage("husimi");
    let field = husimi_of_state(&state, &sp, &grid, &tag);
    let mut t = Table::new("husimi", &["q", "p", "value"], grid.len());
    coupling_meta(&mut t, &sp, &c);
    t.meta("state", &tag).meta("grid", n).meta("normalization", field.normalization());
    for ip in 0..grid.np {
        for iq in 0..grid.nq {
            t.push(row![grid.q(iq), grid.p(ip), field.at(iq, ip)]);
        }
    }
    Ok(Products { tables: vec![t, orbit_table("orbits", &orbits)], ..Default::default() })
}

fn convention(cfg: &RunConfig) -> Res<WehrlConvention> {
    match cfg.convention.as_deref() {
        None | Some("normalized") => Ok(WehrlConvention::Normalized),
        Some("raw") => Ok(WehrlConvention::RawSolidAngle),
        Some(x) => Err(CliError::config(format!("unknown convention {x}, expected normalized or raw"))),
    }
}

fn wehrl(s: &mut Session) -> Res<Products> {
    let cfg = s.config.clone();
    let sp = space(&cfg)?;
    let conv = convention(&cfg)?;
    let defaults = McConfig::default();
    let mc = McConfig {
        samples: cfg.samples.unwrap_or(defaults.samples),
        seed: cfg.seed.unwrap_or(defaults.seed),
        ..defaults
    };
    let e0 = cfg.epsilon0.unwrap_or(1.0);
    let (sweep, declared, meta): (WehrlSweep, Option<usize>, Vec<(&str, String)>) = if cfg.gamma_min.is_some() {
        let ratio = ratio_only(&cfg)?;
        let gammas = gamma_grid(&cfg)?;
        let ks = cfg.k.clone().filter(|k| !k.is_empty()).ok_or_else(|| CliError::config("--k is required".into()))?;
        let par = parity(&cfg)?.unwrap_or(Parity::Positive);
        let n = gammas.len() * ks.len();
        (
            WehrlSweep::Gamma { epsilon0: e0, ratio, gammas, parity: par, ks },
            Some(n),
            vec![("mode", "gamma".into()), ("ratio", ratio.to_string())],
        )
    } else {
        let c = couplings(&cfg)?;
        let window = (cfg.energy_min.unwrap_or(f64::NEG_INFINITY), cfg.energy_max.unwrap_or(f64::INFINITY));
        let parities = parity(&cfg)?.map_or(Parity::both().to_vec(), |p| vec![p]);
        (
            WehrlSweep::Energy { couplings: c, parities, window },
            None,
            vec![("mode", "energy".into()), ("gamma_x", c.gamma_x.to_string()), ("gamma_y", c.gamma_y.to_string())],
        )
    };
    s.stage("wehrl");
    let rows = core(s, wehrl_sweep(&sp, &sweep, &mc, conv))?;
    let cols = ["gamma_x", "parity", "k", "energy_over_j", "jz_over_j", "wehrl", "stderr", "samples", "convention"];
    let mut t = Table::new("wehrl", &cols, declared.unwrap_or(rows.len()));
    t.meta("j", sp.j()).meta("epsilon0", e0).meta("seed", mc.seed);
    for (k, v) in meta {
        t.meta(k, v);
    }
    for r in &rows {
        t.push(row![
            r.gamma_x,
            r.parity.sign(),
            r.k,
            r.energy_over_j,
            r.jz_over_j,
            r.result.value,
            r.result.stderr,
            r.result.samples,
            r.result.convention.label()
        ]);
    }
    Ok(Products { tables: vec![t], ..Default::default() })
}

fn dynamics(s: &mut Session) -> Res<Products> {
    let cfg = s.config.clone();
    let sp = space(&cfg)?;
    let (c, start, scenario) = quench_setup(&cfg, &sp)?;
    let td = TwaConfig::default();
    let twa = TwaConfig {
        samples: cfg.samples.unwrap_or(td.samples),
        seed: cfg.seed.unwrap_or(td.seed),
        window: cfg.window.unwrap_or(td.window),
        ..td
    };
    let qd = QuenchConfig::default();
    let t_max = cfg.t_max.or(scenario.as_ref().map(|x| x.t_max)).unwrap_or(qd.t_max);
    let qc = QuenchConfig { t_max, dt: cfg.dt.unwrap_or(qd.dt), twa, line_integral: true };
    let partner = scenario.as_ref().and_then(|x| x.partner.clone());
    s.stage("quench");
    let r = core(s, run_quench(&sp, &c, &start, partner.as_ref(), &qc))?;

    let mut cols = vec![
        "t", "sp_q", "sp_c", "sp_c_err", "jz_q", "jz_c", "jz_c_err", "sp_q_avg", "sp_c_avg", "jz_q_avg", "jz_c_avg",
    ];
    if r.line_integral.is_some() {
        cols.push("line_integral");
    }
    let mut t = Table::new("dynamics", &cols, qc.times().len());
    coupling_meta(&mut t, &sp, &c);
    t.meta("q0", start.q)
        .meta("p0", start.p)
        .meta("samples", twa.samples)
        .meta("seed", twa.seed)
        .meta("window", twa.window);
    if let Some(sc) = &scenario {
        t.meta("scenario", sc.kind.letter());
    }
    for i in 0..r.times.len() {
        let mut row = row![
            r.times[i],
            r.sp_quantum[i],
            r.sp_classical[i],
            r.sp_classical_err[i],
            r.jz_quantum[i],
            r.jz_classical[i],
            r.jz_classical_err[i],
            r.sp_quantum_avg[i],
            r.sp_classical_avg[i],
            r.jz_quantum_avg[i],
            r.jz_classical_avg[i]
        ];
        if let Some(l) = &r.line_integral {
            row.push(l[i].into());
        }
        t.push(row);
    }
    let mut warnings = Vec::new();
    if r.wigner_clipped > 0 {
        warnings.push(format!("{} Wigner samples clipped at geodesic distance π", r.wigner_clipped));
    }
    if r.twa_dropped > 0 {
        warnings.push(format!("{} TWA trajectories failed and were dropped", r.twa_dropped));
    }
    let (theta, phi) = (start.theta(), start.phi());
    let doc = json!({
        "scenario": scenario.as_ref().map(|x| x.kind.letter().to_string()),
        "alpha0": { "q": start.q, "p": start.p, "theta": theta, "phi": phi },
        "j": sp.j(),
        "couplings": c,
        "seed": twa.seed,
        "samples": twa.samples,
        "epsilon": scenario.as_ref().map_or(lmg_core::classical::classical_energy(&start, &c), |x| x.epsilon),
        "esqpt_epsilon": scenario.as_ref().map(|x| x.esqpt_epsilon),
        "branch": scenario.as_ref().map(|x| x.branch.label()),
        "crossing_n": scenario.as_ref().map(|x| x.crossing_n),
        "line_nodes": r.line_nodes,
    });
    let mut summary = serde_json::Map::new();
    summary.insert("max_line_integral".into(), json!(r.max_line_integral(f64::INFINITY)));
    let t1 = t_max.min(50.0);
    if t1 > 10.0 {
        summary.insert("mean_jz_gap_10_50".into(), json!(r.mean_jz_gap(10.0, t1)));
    }
    let mut tables = vec![t];
    if let Some(p) = &partner {
        tables.push(orbit_table("partner", std::slice::from_ref(p)));
    }
    Ok(Products { tables, documents: vec![("scenario".into(), doc)], warnings, summary })
}
