//! Implementations of the CLI subcommands.

use crate::config::RunConfig;
use crate::{classify, CliError};
use elascat::fem::{
    boundary_points_for_level, build_disk_mesh, DiskMesh, Incidence, MaterialField,
};
use elascat::inversion::{run_sweep, SweepConfig, TraceRow};
use elascat::scenarios::{
    inverse_crime_suspected, phantom_by_name, synthesize, NearFieldDataset, Phantom, RecordData,
    SynthesisOptions,
};
use elascat::solver::ForwardModel;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

pub fn init_workers(n: usize) {
    elascat::set_worker_threads(n);
}

fn prepare_out(cfg: &RunConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", cfg.out.display())))?;
    std::fs::write(cfg.out.join("config.toml"), cfg.to_toml())
        .map_err(|e| CliError::Config(format!("cannot write config echo: {e}")))?;
    Ok(())
}

fn load_phantom(cfg: &RunConfig) -> Result<Option<Phantom>, CliError> {
    match cfg.phantom.as_str() {
        "none" | "zero" => Ok(None),
        name => phantom_by_name(name).map(Some).map_err(classify),
    }
}

fn build_mesh(cfg: &RunConfig, level: u32) -> Result<Arc<DiskMesh>, CliError> {
    let p = boundary_points_for_level(level);
    build_disk_mesh(cfg.radius, 0, p)
        .map(Arc::new)
        .map_err(classify)
}

pub fn cmd_forward(cfg: &RunConfig) -> Result<(), CliError> {
    prepare_out(cfg)?;
    let medium = cfg.medium().map_err(CliError::Config)?;
    let kind = cfg.incidence_kind().map_err(CliError::Config)?;
    let mesh = build_mesh(cfg, cfg.mesh_level)?;
    let t0 = Instant::now();
    let model = ForwardModel::new(mesh.clone(), medium, cfg.omega).map_err(classify)?;
    let q = match load_phantom(cfg)? {
        Some(ph) => ph.material(&mesh),
        None => MaterialField::zeros(mesh.num_nodes()),
    };
    let sys = model.assemble(&q).map_err(classify)?;
    let incidence = Incidence {
        kind,
        angle: cfg.angle,
    };
    let sol = model.solve_forward(&sys, incidence).map_err(classify)?;
    let elapsed = t0.elapsed().as_secs_f64();

    // displacement field
    let mut field = String::from("x,y,re_u1,im_u1,re_u2,im_u2\n");
    for (i, n) in mesh.nodes.iter().enumerate() {
        field.push_str(&format!(
            "{},{},{},{},{},{}\n",
            n[0],
            n[1],
            sol.u[2 * i].re,
            sol.u[2 * i].im,
            sol.u[2 * i + 1].re,
            sol.u[2 * i + 1].im
        ));
    }
    write_file(&cfg.out.join("field.csv"), field.as_bytes())?;

    // boundary trace as a one-record dataset container
    let ds = NearFieldDataset {
        medium,
        frequencies: vec![cfg.omega],
        directions: vec![cfg.angle],
        incidence_kind: kind,
        boundary_points: mesh.boundary_points(),
        phaseless: false,
        noise_level: 0.0,
        noise_seed: cfg.seed,
        provenance_mesh_level: cfg.mesh_level,
        records: vec![RecordData::Complex(sol.trace.clone())],
    };
    ds.write_file(&cfg.out.join("trace.ewnf")).map_err(classify)?;

    // mesh and DtN diagnostics
    let mut buf = Vec::new();
    mesh.write_nodes_csv(&mut buf).map_err(classify)?;
    write_file(&cfg.out.join("nodes.csv"), &buf)?;
    buf.clear();
    mesh.write_triangles_csv(&mut buf).map_err(classify)?;
    write_file(&cfg.out.join("triangles.csv"), &buf)?;
    buf.clear();
    model.dtn.write_mode_csv(&mut buf).map_err(classify)?;
    write_file(
        &cfg.out.join(format!("dtn_modes_omega{}.csv", cfg.omega)),
        &buf,
    )?;

    println!(
        "forward solve: omega = {}, {:?} incidence, {} nodes, residual {:.3e}, {:.2}s",
        cfg.omega,
        kind,
        mesh.num_nodes(),
        sol.residual,
        elapsed
    );
    if cfg.phantom == "none" || cfg.phantom == "zero" {
        // background sanity: trace vs incident wave
        let pts: Vec<[f64; 2]> = mesh
            .boundary_ring
            .iter()
            .map(|&n| mesh.nodes[n as usize])
            .collect();
        let uin = elascat::fem::incident_field(incidence, &model.waves, &pts);
        let w = elascat::fem::boundary_weight(&mesh);
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in sol.trace.iter().zip(&uin) {
            num += (a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr();
            den += b[0].norm_sqr() + b[1].norm_sqr();
        }
        println!(
            "background trace error vs incident wave: {:.3e}",
            (num * w / (den * w)).sqrt()
        );
    }
    Ok(())
}

pub fn cmd_synthesize(cfg: &RunConfig) -> Result<(), CliError> {
    prepare_out(cfg)?;
    let medium = cfg.medium().map_err(CliError::Config)?;
    let kind = cfg.incidence_kind().map_err(CliError::Config)?;
    let schedule = cfg.schedule().map_err(CliError::Config)?;
    let phantom = load_phantom(cfg)?.unwrap_or_else(Phantom::zero);
    if cfg.data_mesh_level <= cfg.mesh_level {
        eprintln!(
            "warning: data mesh level {} does not exceed the inversion mesh level {}; \
             inverse-crime data",
            cfg.data_mesh_level, cfg.mesh_level
        );
    }
    let t0 = Instant::now();
    let ds = synthesize(
        &phantom,
        &schedule,
        kind,
        &medium,
        &SynthesisOptions {
            data_mesh_level: cfg.data_mesh_level,
            dataset_points: boundary_points_for_level(cfg.mesh_level),
            noise_level: cfg.noise,
            seed: cfg.seed,
            phaseless: cfg.phaseless_data,
        },
    )
    .map_err(classify)?;
    let path = cfg.out.join("dataset.ewnf");
    ds.write_file(&path).map_err(classify)?;
    println!(
        "synthesized {} records ({} frequencies × {} directions, P = {}) in {:.1}s -> {}",
        ds.records.len(),
        ds.frequencies.len(),
        ds.directions.len(),
        ds.boundary_points,
        t0.elapsed().as_secs_f64(),
        path.display()
    );
    Ok(())
}

pub fn cmd_invert(cfg: &RunConfig) -> Result<(), CliError> {
    prepare_out(cfg)?;
    let medium = cfg.medium().map_err(CliError::Config)?;
    let kind = cfg.incidence_kind().map_err(CliError::Config)?;
    let schedule = cfg.schedule().map_err(CliError::Config)?;
    let data_path = cfg
        .dataset
        .clone()
        .ok_or_else(|| CliError::Config("invert needs --data <dataset file>".into()))?;
    let data = NearFieldDataset::read_file(&data_path).map_err(classify)?;
    if inverse_crime_suspected(&data, cfg.mesh_level) {
        eprintln!(
            "warning: dataset was synthesized at mesh level {} and the inversion runs at \
             level {}; this is an inverse-crime configuration",
            data.provenance_mesh_level, cfg.mesh_level
        );
    }
    let step = cfg.step().map_err(CliError::Config)?;
    let stopping = cfg.stopping(data.noise_level).map_err(CliError::Config)?;
    let variant = cfg.variant().map_err(CliError::Config)?;
    let mesh = build_mesh(cfg, cfg.mesh_level)?;
    let truth = load_phantom(cfg)?.map(|ph| ph.ground_truth(&mesh));

    let sweep = SweepConfig {
        mesh: mesh.clone(),
        medium,
        schedule: &schedule,
        step: &step,
        stopping: &stopping,
        variant,
        incidence_kind: kind,
    };
    let t0 = Instant::now();
    let progress = |row: &TraceRow| {
        if row.l == schedule.inner_iterations || row.l == 0 {
            eprintln!(
                "  omega {:6.2} direction {:2} residual {:.4e} e=({:.3},{:.3},{:.3})",
                row.omega, row.j, row.residual, row.e_q[0], row.e_q[1], row.e_q[2]
            );
        }
    };
    let initial = MaterialField::zeros(mesh.num_nodes());
    let result = run_sweep(&sweep, &data, initial, truth.as_ref(), Some(&progress));
    let (q, trace) = match result {
        Ok(ok) => ok,
        Err(failure) => {
            // persist the partial trace and iterate before bailing out
            let mut buf = Vec::new();
            if failure.trace.write_csv(&mut buf).is_ok() {
                let _ = std::fs::write(cfg.out.join("trace.partial.csv"), &buf);
            }
            for (name, field) in [
                ("q_lambda.partial.csv", &failure.q.q_lambda),
                ("q_mu.partial.csv", &failure.q.q_mu),
                ("q_rho.partial.csv", &failure.q.q_rho),
            ] {
                buf.clear();
                if mesh.write_field_csv(field, &mut buf).is_ok() {
                    let _ = std::fs::write(cfg.out.join(name), &buf);
                }
            }
            eprintln!("{failure}");
            return Err(classify(failure.error));
        }
    };
    let elapsed = t0.elapsed().as_secs_f64();

    let mut buf = Vec::new();
    trace.write_csv(&mut buf).map_err(classify)?;
    write_file(&cfg.out.join("trace.csv"), &buf)?;
    for (name, field) in [
        ("q_lambda.csv", &q.q_lambda),
        ("q_mu.csv", &q.q_mu),
        ("q_rho.csv", &q.q_rho),
    ] {
        buf.clear();
        mesh.write_field_csv(field, &mut buf).map_err(classify)?;
        write_file(&cfg.out.join(name), &buf)?;
    }

    let final_e = truth
        .as_ref()
        .map(|t| t.errors(&mesh, &q))
        .unwrap_or([f64::NAN; 3]);
    let final_residual = trace.rows.last().map(|r| r.residual).unwrap_or(f64::NAN);
    let summary = format!(
        "iterations = {}\nfinal_residual = {:.6e}\ne_qlambda = {}\ne_qmu = {}\ne_qrho = {}\nseconds = {:.1}\n",
        trace.rows.len(),
        final_residual,
        final_e[0],
        final_e[1],
        final_e[2],
        elapsed
    );
    write_file(&cfg.out.join("summary.toml"), summary.as_bytes())?;
    println!(
        "inversion finished: {} iterations in {:.1}s, final residual {:.4e}, e_q = ({}, {}, {})",
        trace.rows.len(),
        elapsed,
        final_residual,
        final_e[0],
        final_e[1],
        final_e[2]
    );
    Ok(())
}

pub fn cmd_validate() -> Result<(), CliError> {
    let results = elascat::validate::run_suites(None);
    let mut failed = 0usize;
    println!("suite,status,detail");
    for r in &results {
        println!(
            "{},{},{}",
            r.name,
            if r.passed { "pass" } else { "FAIL" },
            r.detail
        );
        if !r.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        Err(CliError::Validation(format!("{failed} suite(s) failed")))
    } else {
        Ok(())
    }
}

pub fn cmd_dataset_info(cfg: &RunConfig) -> Result<(), CliError> {
    let path = cfg
        .dataset
        .clone()
        .ok_or_else(|| CliError::Config("dataset-info needs --data <dataset file>".into()))?;
    let f = std::fs::File::open(&path)
        .map_err(|e| CliError::Config(format!("cannot open {}: {e}", path.display())))?;
    let header =
        NearFieldDataset::read_header_json(std::io::BufReader::new(f)).map_err(classify)?;
    println!("{header}");
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(bytes)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}
