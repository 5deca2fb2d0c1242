use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use qfsk_lab::bounds::{normal_curve, rcu_curve, BoundConfig};
use qfsk_lab::channel::{ChannelParams, Metric};
use qfsk_lab::codes::{CodeConfig, ConvCodeSpec, CrcSpec};
use qfsk_lab::gf4::Gf4Poly;
use qfsk_lab::sim::{
    ebno_db_to_esno_db, esno_db_to_ebno_db, estimate_p2, fmt_f64, gap_to_bound, read_curve, run_sweep,
    write_gap_csv, write_normal_csv, write_rcu_csv, write_sweep_csv, CsvPreamble, Manifest, SweepConfig,
};
use qfsk_lab::spectrum::{
    dso_search, enumerate_bounded_weight_codewords, free_distance, spectrum_for_crc, union_bound_fer,
    DistanceSpectrum, SearchOptions, DEFAULT_EVENT_CAP,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::{BoundArgs, CodeArgs, FerArgs, GapArgs, GridArgs, MetricArg, RunArgs, SearchArgs, SnrRef, SpectrumArgs};
use crate::campaign::CampaignFile;
use crate::Failure;

const BUILD: &str = env!("QFSK_LAB_BUILD");

fn parse_poly(text: &str, what: &str) -> Result<Gf4Poly, Failure> {
    text.parse()
        .map_err(|e| Failure::invalid(format!("invalid {what} polynomial {text:?}: {e}")))
}

fn conv_code(nu: usize, g1: Option<&str>, g2: Option<&str>) -> Result<ConvCodeSpec, Failure> {
    let conv = match (g1, g2) {
        (Some(a), Some(b)) => ConvCodeSpec::new(parse_poly(a, "g1")?, parse_poly(b, "g2")?)?,
        (None, None) => match nu {
            2 => ConvCodeSpec::memory2(),
            4 => ConvCodeSpec::memory4(),
            _ => return Err(Failure::invalid(format!("no default generators for nu = {nu}; pass --g1 and --g2"))),
        },
        _ => return Err(Failure::invalid("--g1 and --g2 must be given together")),
    };
    if conv.nu() != nu {
        return Err(Failure::invalid(format!(
            "--nu {nu} does not match generators of degree {}",
            conv.nu()
        )));
    }
    Ok(conv)
}

fn code_from_flags(a: &CodeArgs, nu: usize) -> Result<CodeConfig, Failure> {
    let conv = conv_code(nu, a.g1.as_deref(), a.g2.as_deref())?;
    let crc = match (a.m.unwrap_or(0), &a.g) {
        (_, Some(g)) => {
            let crc = CrcSpec::new(parse_poly(g, "CRC")?)?;
            if a.m.is_some_and(|m| m != crc.m()) {
                return Err(Failure::invalid(format!("--m does not match the degree of --g ({})", crc.m())));
            }
            (crc.m() > 0).then_some(crc)
        }
        (0, None) => None,
        (m, None) => return Err(Failure::invalid(format!("--m {m} needs a CRC polynomial --g"))),
    };
    Ok(CodeConfig::new(a.k.unwrap_or(64), conv, crc)?)
}

/// The code from flags when `--nu` is given, else from the campaign.
fn resolve_code(a: &CodeArgs, campaign: Option<&CampaignFile>) -> Result<Option<CodeConfig>, Failure> {
    match (a.nu, campaign) {
        (Some(nu), _) => code_from_flags(a, nu).map(Some),
        (None, Some(c)) => {
            if a.g1.is_some() || a.g2.is_some() || a.k.is_some() || a.m.is_some() || a.g.is_some() {
                return Err(Failure::invalid("code flags need --nu when overriding a campaign code"));
            }
            Ok(Some(c.code.clone()))
        }
        (None, None) => Ok(None),
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Failure::invalid(format!("invalid number {v:?}")))
        })
        .collect()
}

/// `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 1 {
        return parse_list(text);
    }
    let nums = parse_list(&parts.join(","))?;
    let [start, stop, step] = nums[..] else {
        return Err(Failure::invalid(format!("grid {text:?} must be start:stop:step")));
    };
    if !(step > 0.0) || stop < start {
        return Err(Failure::invalid(format!("grid {text:?} needs step > 0 and stop >= start")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

fn resolve_grid(g: &GridArgs, campaign: Option<&CampaignFile>) -> Result<(Vec<f64>, SnrRef), Failure> {
    let sweep = campaign.and_then(|c| c.sweep.as_ref());
    let grid = match (&g.grid, sweep) {
        (Some(text), _) => parse_grid(text)?,
        (None, Some(s)) => s.grid_db.clone(),
        (None, None) => return Err(Failure::invalid("an SNR grid is required (--grid)")),
    };
    let snr_ref = g.snr_ref.or(sweep.map(|s| s.snr_ref)).unwrap_or_default();
    Ok((grid, snr_ref))
}

fn resolve_workers(flag: Option<usize>, campaign: Option<&CampaignFile>) -> Result<usize, Failure> {
    let w = flag
        .or(campaign.and_then(|c| c.workers))
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if w == 0 {
        return Err(Failure::invalid("workers must be >= 1"));
    }
    Ok(w)
}

fn resolve_seed(flag: Option<u64>, campaign: Option<&CampaignFile>) -> Result<u64, Failure> {
    flag.or(campaign.and_then(|c| c.seed))
        .ok_or_else(|| Failure::invalid("a seed is required (--seed or \"seed\" in the campaign)"))
}

fn load_campaign(run: &RunArgs) -> Result<Option<CampaignFile>, Failure> {
    run.campaign.as_deref().map(CampaignFile::load).transpose()
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::output(format!("cannot write {}: {e}", path.display())))
}

fn finish(w: BufWriter<File>, path: &Path) -> Result<(), Failure> {
    w.into_inner()
        .map_err(|e| e.into_error())
        .and_then(|f| f.sync_all())
        .map_err(|e| Failure::output(format!("cannot write {}: {e}", path.display())))
}

fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

fn invocation() -> Vec<String> {
    let mut args: Vec<String> = std::env::args().collect();
    if let Some(first) = args.first_mut() {
        *first = "qfsk-lab".into();
    }
    args
}

fn preamble(seed: u64, workers: usize, extra: &[String]) -> CsvPreamble {
    let mut lines = vec![invocation().join(" "), format!("seed {seed} workers {workers}")];
    lines.extend_from_slice(extra);
    CsvPreamble { lines }
}

fn write_manifest(out: &Path, m: &Manifest) -> Result<(), Failure> {
    let path = manifest_path(out);
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, m).map_err(|e| Failure::output(e.to_string()))?;
    writeln!(w).map_err(|e| Failure::output(e.to_string()))?;
    finish(w, &path)
}

fn manifest(command: &str, seed: u64, workers: usize, snr_ref: SnrRef, config: impl Serialize, outputs: Vec<&Path>) -> Manifest {
    Manifest {
        tool: format!("qfsk-lab {}", env!("CARGO_PKG_VERSION")),
        build: BUILD.into(),
        invocation: invocation(),
        command: command.into(),
        seed,
        workers,
        snr_ref: snr_ref.as_str().into(),
        conversion: Manifest::conversion_note(),
        config: serde_json::to_value(config).unwrap_or_default(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    }
}

#[derive(Serialize)]
struct BaseCodeReport {
    nu: usize,
    #[serde(rename = "K")]
    k: usize,
    g1: Gf4Poly,
    g2: Gf4Poly,
    d_tilde: u32,
    d_free: u32,
    spectrum: DistanceSpectrum,
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .map_err(|e| Failure::output(format!("cannot write {}: {e}", path.display())))?;
    finish(w, path)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::output(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn search(a: SearchArgs) -> Result<(), Failure> {
    let conv = conv_code(a.nu, a.g1.as_deref(), a.g2.as_deref())?;
    let mut opts = SearchOptions::for_code(&conv);
    if let Some(d) = a.dtilde {
        opts.d_tilde = d;
    }
    opts.workers = resolve_workers(a.workers, None)?;
    if let Some(out) = &a.out {
        create(out)?;
    }
    let (table, json) = if a.m == 0 {
        let events = enumerate_bounded_weight_codewords(&conv, a.k, opts.d_tilde, opts.event_cap)?;
        let spectrum = spectrum_for_crc(&events, conv.nu(), None, a.k, opts.d_tilde);
        let d_free = spectrum.d_min().ok_or(qfsk_lab::Error::DtildeTooSmall { dtilde: opts.d_tilde })?;
        let table = format!(
            "nu  g1  g2  d_free  N_t  N_c\n{:>2}  ({})  ({})  {:>3}  {:>4}  {:>6}\n",
            conv.nu(),
            conv.g1().to_string().replace(',', ", "),
            conv.g2().to_string().replace(',', ", "),
            d_free,
            spectrum.n_t_at(d_free),
            spectrum.n_c_at(d_free)
        );
        let report = BaseCodeReport {
            nu: conv.nu(),
            k: a.k,
            g1: conv.g1().clone(),
            g2: conv.g2().clone(),
            d_tilde: opts.d_tilde,
            d_free,
            spectrum,
        };
        (table, serde_json::to_value(report).map_err(|e| Failure::output(e.to_string()))?)
    } else {
        let report = dso_search(&conv, a.k, a.m, &opts)?;
        let mut table = format!(" nu   m  g  d_min  N_t  N_c\n{}\n", report.table_row());
        if report.co_optimal.len() > 1 {
            let ties: Vec<String> = report.co_optimal.iter().map(|c| format!("({})", c.poly())).collect();
            table.push_str(&format!("co-optimal through d~ = {}: {}\n", report.d_tilde, ties.join(" ")));
        }
        (table, serde_json::to_value(&report).map_err(|e| Failure::output(e.to_string()))?)
    };
    print!("{table}");
    if let Some(out) = &a.out {
        write_json(out, &json)?;
        write_text(&out.with_extension("txt"), &table)?;
    }
    Ok(())
}

pub fn spectrum(a: SpectrumArgs) -> Result<(), Failure> {
    let nu = a.code.nu.ok_or_else(|| Failure::invalid("--nu is required"))?;
    let code = code_from_flags(&a.code, nu)?;
    let d_tilde = a.dtilde.unwrap_or_else(|| free_distance(code.conv()) + 12);
    for path in [&a.out, &a.union_out].into_iter().flatten() {
        create(path)?;
    }
    let grid = a.grid.grid.as_deref().map(parse_grid).transpose()?;
    let seed = match (&grid, a.seed) {
        (Some(_), None) => return Err(Failure::invalid("--seed is required with --grid")),
        (_, s) => s,
    };
    let events = enumerate_bounded_weight_codewords(code.conv(), code.crc_word_len(), d_tilde, DEFAULT_EVENT_CAP)?;
    let spectrum = spectrum_for_crc(&events, code.nu(), code.crc(), code.k(), d_tilde);
    println!("  w       N_t        N_c");
    for w in 0..=d_tilde {
        if spectrum.n_c_at(w) > 0 {
            println!("{w:>3}  {:>8}  {:>9}", spectrum.n_t_at(w), spectrum.n_c_at(w));
        }
    }
    if let Some(out) = &a.out {
        write_json(out, &spectrum)?;
    }
    let (Some(grid), Some(seed)) = (grid, seed) else {
        return Ok(());
    };
    let snr_ref = a.grid.snr_ref.unwrap_or_default();
    let (k, n) = (code.k(), code.n());
    let mut rows = Vec::new();
    for (i, &db) in grid.iter().enumerate() {
        let (ebno, esno) = match snr_ref {
            SnrRef::Ebno => (db, ebno_db_to_esno_db(db, k, n)),
            SnrRef::Esno => (esno_db_to_ebno_db(db, k, n), db),
        };
        let params = ChannelParams::from_db(esno)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut p2 = vec![0.0; d_tilde as usize + 1];
        for d in spectrum.d_min().unwrap_or(d_tilde + 1)..=d_tilde {
            p2[d as usize] = estimate_p2(d, &params, a.p2_samples, &mut rng)?.p2;
        }
        let ub = union_bound_fer(&spectrum, |d| p2[d as usize]);
        println!("Eb/N0 {ebno:.3} dB  Es/N0 {esno:.3} dB  estimated union bound {ub:.4e}");
        rows.push([format!("{ebno:.4}"), format!("{esno:.4}"), fmt_f64(ub)]);
    }
    if let Some(path) = &a.union_out {
        let mut buf = Vec::new();
        preamble(seed, 1, &[format!("estimated union bound truncated at d~ = {d_tilde}")])
            .write(&mut buf)
            .map_err(|e| Failure::output(e.to_string()))?;
        buf.extend_from_slice(b"ebno_db,esno_db,union_estimate\n");
        for r in rows {
            buf.extend_from_slice(r.join(",").as_bytes());
            buf.push(b'\n');
        }
        write_text(path, std::str::from_utf8(&buf).unwrap_or_default())?;
    }
    Ok(())
}

pub fn fer(a: FerArgs) -> Result<(), Failure> {
    let campaign = load_campaign(&a.run)?;
    let c = campaign.as_ref();
    let code = resolve_code(&a.code, c)?.ok_or_else(|| Failure::invalid("a code is required (--nu or --campaign)"))?;
    let (grid, snr_ref) = resolve_grid(&a.grid, c)?;
    let seed = resolve_seed(a.run.seed, c)?;
    let workers = resolve_workers(a.run.workers, c)?;
    let out = a
        .run
        .out
        .clone()
        .or(c.and_then(|c| c.output.fer.clone()))
        .ok_or_else(|| Failure::invalid("an output path is required (--out)"))?;
    let mut decoder = c.map(|c| c.decoder).unwrap_or_default();
    if let Some(l) = a.initial_list {
        decoder.initial_list = l;
    }
    if let Some(l) = a.max_list {
        decoder.max_list = l;
    }
    if let Some(m) = a.metric {
        decoder.metric = match m {
            MetricArg::Envelope => Metric::Envelope,
            MetricArg::SquareLaw => Metric::SquareLaw,
        };
    }
    let mut stop = c.and_then(|c| c.sweep.as_ref()).map(|s| s.stop).unwrap_or_default();
    if let Some(e) = a.min_errors {
        stop.min_frame_errors = e;
    }
    if let Some(f) = a.max_frames {
        stop.max_frames = f;
    }
    let ebno_grid_db = match snr_ref {
        SnrRef::Ebno => grid,
        SnrRef::Esno => grid.iter().map(|&db| esno_db_to_ebno_db(db, code.k(), code.n())).collect(),
    };
    let cfg = SweepConfig {
        code,
        decoder,
        ebno_grid_db,
        stop,
        seed,
        workers,
    };
    cfg.validate()?;
    let w = create(&out)?;
    let result = run_sweep(&cfg)?;
    for p in &result.points {
        println!(
            "Eb/N0 {:.3} dB  Es/N0 {:.3} dB  frames {}  errors {} ({} undetected, {} exhausted)  FER {:.3e}  mean list {:.3}  {:.1} s",
            p.ebno_db,
            p.esno_db,
            p.frames,
            p.frame_errors,
            p.undetected,
            p.list_exhausted,
            p.fer,
            p.mean_list_size,
            p.wall_time.as_secs_f64()
        );
    }
    let pre = preamble(seed, workers, &[format!("K {} n {} snr_ref {}", cfg.code.k(), cfg.code.n(), snr_ref.as_str())]);
    let mut w = w;
    write_sweep_csv(&mut w, &pre, &result, &cfg.stop).map_err(|e| Failure::output(e.to_string()))?;
    finish(w, &out)?;
    write_manifest(&out, &manifest("fer", seed, workers, snr_ref, &cfg, vec![&out]))
}

struct BoundSetup {
    k: usize,
    n: usize,
    esno_db: Vec<f64>,
    snr_ref: SnrRef,
    cfg: BoundConfig,
    out: PathBuf,
}

#[derive(Serialize)]
struct BoundManifestConfig<'a> {
    #[serde(rename = "K")]
    k: usize,
    n: usize,
    esno_grid_db: &'a [f64],
    bounds: &'a BoundConfig,
}

fn bound_setup(a: &BoundArgs, which: &str) -> Result<BoundSetup, Failure> {
    let campaign = load_campaign(&a.run)?;
    let c = campaign.as_ref();
    let code = resolve_code(&a.code, c)?;
    let section = c.and_then(|c| c.bounds.clone()).unwrap_or_default();
    let (k, n) = match (&code, a.n.or(section.n)) {
        (Some(code), n) => (code.k(), n.unwrap_or(code.n())),
        (None, Some(n)) => (a.code.k.unwrap_or(64), n),
        (None, None) => return Err(Failure::invalid("a code (--nu or --campaign) or --n is required")),
    };
    if n == 0 || k == 0 {
        return Err(Failure::invalid("K and n must be positive"));
    }
    let (grid, snr_ref) = resolve_grid(&a.grid, c)?;
    let esno_db = match snr_ref {
        SnrRef::Ebno => grid.iter().map(|&db| ebno_db_to_esno_db(db, k, n)).collect(),
        SnrRef::Esno => grid,
    };
    let mut cfg = BoundConfig::new(resolve_seed(a.run.seed, c)?);
    cfg.workers = resolve_workers(a.run.workers, c)?;
    for (dst, src) in [
        (&mut cfg.e0_samples, a.e0_samples.or(section.e0_samples)),
        (&mut cfg.omega_samples, a.omega_samples.or(section.omega_samples)),
        (&mut cfg.capacity_samples, a.capacity_samples.or(section.capacity_samples)),
    ] {
        if let Some(v) = src {
            *dst = v;
        }
    }
    if let Some(t) = a.tol.or(section.tol) {
        cfg.tol = t;
    }
    let out = a
        .run
        .out
        .clone()
        .or(c.and_then(|c| if which == "rcu" { c.output.rcu.clone() } else { c.output.normal.clone() }))
        .ok_or_else(|| Failure::invalid("an output path is required (--out)"))?;
    Ok(BoundSetup {
        k,
        n,
        esno_db,
        snr_ref,
        cfg,
        out,
    })
}

pub fn rcu(a: BoundArgs) -> Result<(), Failure> {
    let s = bound_setup(&a, "rcu")?;
    let mut w = create(&s.out)?;
    let rows = rcu_curve(s.n, s.k, &s.esno_db, &s.cfg)?;
    for r in &rows {
        println!(
            "Es/N0 {:.3} dB  rho_hat {:.4} ({})  RCU {:.4e} +- {:.1e}",
            r.esno_db,
            r.rho_hat,
            r.region.as_str(),
            r.rcu,
            r.std_err
        );
    }
    let pre = preamble(s.cfg.seed, s.cfg.workers, &[format!("K {} n {} snr_ref {}", s.k, s.n, s.snr_ref.as_str())]);
    write_rcu_csv(&mut w, &pre, &rows, s.k, s.n).map_err(|e| Failure::output(e.to_string()))?;
    finish(w, &s.out)?;
    let config = BoundManifestConfig {
        k: s.k,
        n: s.n,
        esno_grid_db: &s.esno_db,
        bounds: &s.cfg,
    };
    write_manifest(&s.out, &manifest("rcu", s.cfg.seed, s.cfg.workers, s.snr_ref, config, vec![&s.out]))
}

pub fn normal(a: BoundArgs) -> Result<(), Failure> {
    let s = bound_setup(&a, "normal")?;
    let mut w = create(&s.out)?;
    let rows = normal_curve(s.n, s.k, &s.esno_db, &s.cfg)?;
    for r in &rows {
        println!(
            "Es/N0 {:.3} dB  C {:.4} bits  V {:.4} bits^2  FER {:.4e}",
            r.esno_db, r.c_bits, r.v_bits, r.fer
        );
    }
    let pre = preamble(s.cfg.seed, s.cfg.workers, &[format!("K {} n {} snr_ref {}", s.k, s.n, s.snr_ref.as_str())]);
    write_normal_csv(&mut w, &pre, &rows, s.k, s.n).map_err(|e| Failure::output(e.to_string()))?;
    finish(w, &s.out)?;
    let config = BoundManifestConfig {
        k: s.k,
        n: s.n,
        esno_grid_db: &s.esno_db,
        bounds: &s.cfg,
    };
    write_manifest(&s.out, &manifest("normal", s.cfg.seed, s.cfg.workers, s.snr_ref, config, vec![&s.out]))
}

const FER_COLUMNS: [&str; 3] = ["fer", "rcu", "fer_normal"];

fn read_fer_curve(path: &Path, snr_ref: SnrRef) -> Result<Vec<(f64, f64)>, Failure> {
    let file = File::open(path).map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))?;
    let (_, pts) = read_curve(file, snr_ref.column(), &FER_COLUMNS)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    Ok(pts)
}

pub fn gap(a: GapArgs) -> Result<(), Failure> {
    let fers = parse_list(&a.fer)?;
    if fers.iter().any(|&f| !(f > 0.0 && f < 1.0)) {
        return Err(Failure::invalid("FER targets must lie in (0, 1)"));
    }
    let curve = read_fer_curve(&a.curve, a.snr_ref)?;
    let bound = read_fer_curve(&a.bound, a.snr_ref)?;
    let w = a.out.as_deref().map(create).transpose()?;
    let report = gap_to_bound(&curve, &bound, &fers);
    for (f, g) in &report.gaps {
        println!("FER {f:.1e}  gap {g:.3} dB");
    }
    for f in &report.omitted {
        eprintln!("warning: FER {f:.1e} is outside the overlap of the two curves; omitted");
    }
    if let (Some(mut w), Some(out)) = (w, &a.out) {
        let pre = CsvPreamble {
            lines: vec![invocation().join(" "), format!("snr_ref {}", a.snr_ref.as_str())],
        };
        write_gap_csv(&mut w, &pre, &report).map_err(|e| Failure::output(e.to_string()))?;
        finish(w, out)?;
    }
    Ok(())
}
