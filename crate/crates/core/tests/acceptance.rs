//! Exit criteria. Runs every check, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::process::ExitCode;
use std::time::Instant;

use cellvol::cases::validate_watertight;
use cellvol::grid::{
    adjacent_face_agreement, convergence_study, measure_grid, FieldSource, GridSpec, ImplicitField,
};
use cellvol::measure::{component_surface, measure_config};
use cellvol::oracles::{corner_tetra_volume, mc_point_in_mesh_volume, plane_clip_box};
use cellvol::topology::{config_orbits, validate_rotation_group, ROTATION_TABLE};
use cellvol::{lookup_table, Component, Config, Point3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SPHERE_VOLUME: f64 = 4.18879020479;
const SPHERE_AREA: f64 = 12.5663706144;
const MESHES: [usize; 4] = [10, 20, 40, 80];
const REFERENCE_VOLUME: [f64; 4] = [4.00416024, 4.13823907, 4.17534124, 4.18536131];
const REFERENCE_VOLUME_ERROR: [f64; 4] = [0.18462996479, 0.05055113479, 0.01344896479, 0.00342889479];
const REFERENCE_AREA: [f64; 4] = [12.27248842, 12.48614607, 12.54510172, 12.56094478];
const REFERENCE_AREA_ERROR: [f64; 4] = [0.2938821944, 0.0802245444, 0.0212688944, 0.0054258344];

const UNIT_LO: Point3 = Point3::ZERO;
const UNIT_HI: Point3 = Point3::new(1.0, 1.0, 1.0);
const DOMAIN_LO: Point3 = Point3::ZERO;
const DOMAIN_HI: Point3 = Point3::new(3.0, 3.0, 3.0);

fn sphere() -> ImplicitField {
    ImplicitField::Sphere {
        center: Point3::new(1.5, 1.5, 1.5),
        radius: 1.0,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn table_reproduction() -> Outcome {
    let start = Instant::now();
    let study = convergence_study(
        &MESHES,
        DOMAIN_LO,
        DOMAIN_HI,
        &sphere(),
        0.0,
        Component::Zero,
        SPHERE_VOLUME,
        SPHERE_AREA,
    )
    .expect("sphere study");
    let elapsed = start.elapsed().as_secs_f64();
    let mut pass = elapsed < 10.0;
    let mut detail = Vec::new();
    for (k, row) in study.rows.iter().enumerate() {
        let dv = row.volume - REFERENCE_VOLUME[k];
        let da = row.area - REFERENCE_AREA[k];
        let ev = rel(row.volume_error, REFERENCE_VOLUME_ERROR[k]);
        let ea = rel(row.area_error, REFERENCE_AREA_ERROR[k]);
        let ok = dv.abs() <= 1e-3 && da.abs() <= 1e-3 && ev <= 0.02 && ea <= 0.02;
        pass &= ok;
        detail.push(format!(
            "{}: dV={dv:+.2e} dA={da:+.2e} errV {:.1}% errA {:.1}%{}",
            row.mesh,
            100.0 * ev,
            100.0 * ea,
            if ok { "" } else { " (out)" }
        ));
    }
    detail.push(format!("{elapsed:.2}s"));
    Outcome {
        pass,
        detail: detail.join("; "),
    }
}

fn second_order() -> Outcome {
    let study = convergence_study(
        &MESHES,
        DOMAIN_LO,
        DOMAIN_HI,
        &sphere(),
        0.0,
        Component::Zero,
        SPHERE_VOLUME,
        SPHERE_AREA,
    )
    .expect("sphere study");
    let mut pass = true;
    let mut detail = Vec::new();
    for row in &study.rows[2..] {
        let orders = [row.volume_order, row.area_order];
        pass &= orders.iter().all(|o| o.is_some_and(|o| (1.7..=2.3).contains(&o)));
        detail.push(format!(
            "{}: volume {:.3} area {:.3}",
            row.mesh,
            row.volume_order.unwrap_or(f64::NAN),
            row.area_order.unwrap_or(f64::NAN)
        ));
    }
    Outcome {
        pass,
        detail: detail.join("; "),
    }
}

fn planar_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x504c);
    let spec = GridSpec::over_domain(DOMAIN_LO, DOMAIN_HI, [10; 3]).unwrap();
    let (mut worst_v, mut worst_a) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let normal = loop {
            let d = Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if d.norm() > 0.1 && d.norm() <= 1.0 {
                break d / d.norm();
            }
        };
        let through = Point3::new(rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0));
        let offset = normal.dot(through);
        let exact = plane_clip_box(normal, offset, DOMAIN_LO, DOMAIN_HI).unwrap();
        let m = measure_grid(&spec, &FieldSource::Implicit(ImplicitField::Plane { normal, offset }), 0.0).unwrap();
        worst_v = worst_v.max(rel(m.total_volume1, exact.volume));
        worst_a = worst_a.max(rel(m.total_interface_area, exact.section_area));
    }
    Outcome {
        pass: worst_v <= 1e-12 && worst_a <= 1e-12,
        detail: format!("100 planes on 10^3: worst volume {worst_v:.1e}, worst area {worst_a:.1e}"),
    }
}

fn watertightness() -> Outcome {
    let table = lookup_table();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5754);
    let mut leaks = 0;
    let mut worst_shift = 0.0f64;
    for e in table.entries() {
        for _ in 0..100 {
            let params: [f64; 12] = std::array::from_fn(|_| rng.gen());
            if !validate_watertight(&e.entry, &params).is_watertight() {
                leaks += 1;
            }
            let shift = Point3::new(
                rng.gen_range(-1e3..1e3),
                rng.gen_range(-1e3..1e3),
                rng.gen_range(-1e3..1e3),
            );
            let a = measure_config(e.config, &params, UNIT_LO, UNIT_HI).unwrap();
            let b = measure_config(e.config, &params, UNIT_LO + shift, UNIT_HI + shift).unwrap();
            worst_shift = worst_shift.max(rel(a.volume1, b.volume1));
        }
    }
    Outcome {
        pass: leaks == 0 && worst_shift <= 1e-12,
        detail: format!("25600 draws: {leaks} not closed; worst translation change {worst_shift:.1e}"),
    }
}

fn oracle_equivalence() -> Outcome {
    let table = lookup_table();
    let mut rng = ChaCha8Rng::seed_from_u64(0x4d43);
    let mut worst = (0.0f64, 0u8);
    let mut failures = 0;
    for e in table.entries() {
        // keep every enclosed piece large enough to be sampled
        let params: [f64; 12] = std::array::from_fn(|_| rng.gen_range(0.05..0.95));
        let (component, tris) = component_surface(e.config, &params, UNIT_LO, UNIT_HI);
        let kernel = measure_config(e.config, &params, UNIT_LO, UNIT_HI).unwrap().volume(component);
        match mc_point_in_mesh_volume(&tris, UNIT_LO, UNIT_HI, 1_000_000, 1000 + e.config.0 as u64) {
            Ok(mc) => {
                let s = mc.sigmas(kernel);
                if s > 4.0 {
                    failures += 1;
                }
                if s > worst.0 {
                    worst = (s, e.config.0);
                }
            }
            Err(_) => failures += 1,
        }
    }

    let mut worst_tet = 0.0f64;
    let corner = Config(0x01);
    for k in 0..101 {
        let mut params = [0.5; 12];
        if k > 0 {
            params = std::array::from_fn(|_| rng.gen());
        }
        // e0 and e8 start at v0, e3 runs v3 -> v0
        let tet = corner_tetra_volume([params[0], 1.0 - params[3], params[8]], [1.0; 3]);
        let m = measure_config(corner, &params, UNIT_LO, UNIT_HI).unwrap();
        worst_tet = worst_tet.max((m.volume1 - tet).abs());
    }
    Outcome {
        pass: failures == 0 && worst_tet <= 1e-15,
        detail: format!(
            "256 configs at 1e6 samples: {failures} beyond 4 sigma, worst {:.2} sigma (0x{:02x}); corner tetrahedron worst {worst_tet:.1e}",
            worst.0, worst.1
        ),
    }
}

fn face_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4643);
    let spec = GridSpec::over_domain(Point3::ZERO, Point3::new(5.0, 5.0, 5.0), [5; 3]).unwrap();
    let mut mismatches = 0;
    let mut segments = 0;
    for _ in 0..50 {
        let values = (0..spec.node_count())
            .map(|_| if rng.gen() { 1.0 } else { -1.0 })
            .collect();
        let r = adjacent_face_agreement(&spec, &FieldSource::Nodes(values), 0.0).unwrap();
        mismatches += r.mismatches.len();
        segments += r.segments_checked;
    }
    let sphere_spec = GridSpec::over_domain(DOMAIN_LO, DOMAIN_HI, [10; 3]).unwrap();
    let r = adjacent_face_agreement(&sphere_spec, &FieldSource::Implicit(sphere()), 0.0).unwrap();
    Outcome {
        pass: mismatches == 0 && r.is_consistent(),
        detail: format!(
            "random fields: {mismatches} mismatches over {segments} segments; sphere 10^3: {} mismatches over {} segments",
            r.mismatches.len(),
            r.segments_checked
        ),
    }
}

fn closed_surface() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in MESHES {
        let spec = GridSpec::over_domain(DOMAIN_LO, DOMAIN_HI, [n; 3]).unwrap();
        let m = measure_grid(&spec, &FieldSource::Implicit(sphere()), 0.0).unwrap();
        let normal = m.normal_integral.norm() / m.total_interface_area;
        let partition = rel(m.total_volume0 + m.total_volume1, 27.0);
        pass &= normal <= 1e-10 && partition <= 1e-12;
        detail.push(format!("{n}: |n|/A {normal:.1e}, partition {partition:.1e}"));
    }
    Outcome {
        pass,
        detail: detail.join("; "),
    }
}

fn table_integrity() -> Outcome {
    let table = lookup_table();
    let mut ids: Vec<u8> = table.entries().iter().map(|e| e.case_id).collect();
    let covered = table.entries().len();
    ids.sort();
    ids.dedup();
    let orbit_total: usize = table.report().orbit_sizes.iter().sum();
    let group = validate_rotation_group(&ROTATION_TABLE);
    let orbits = config_orbits().len();
    Outcome {
        pass: covered == 256 && ids.len() == 23 && orbit_total == 256 && group.is_ok() && orbits == 23,
        detail: format!(
            "{covered} configs, {} case ids, orbit sizes sum {orbit_total}, {orbits} orbits, group violations {}",
            ids.len(),
            group.violations.len()
        ),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("sphere convergence table", table_reproduction),
        ("second-order convergence", second_order),
        ("planar exactness", planar_exactness),
        ("watertightness", watertightness),
        ("oracle equivalence", oracle_equivalence),
        ("face consistency", face_consistency),
        ("closed-surface normal and partition", closed_surface),
        ("table integrity", table_integrity),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let out = check();
        if !out.pass {
            failed += 1;
        }
        println!(
            "{} {name}: {} [{:.1}s]",
            if out.pass { "PASS" } else { "FAIL" },
            out.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
