use cellvol::cases::validate_watertight;
use cellvol::grid::{sample_field, FieldSource, GridSpec, ImplicitField, NodeField};
use cellvol::io::{read_field, write_field};
use cellvol::measure::measure_config;
use cellvol::{lookup_table, measure_cell, CellGeometry, Config, Point3};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = [f64; 12]> {
    proptest::array::uniform12(0.0..=1.0f64)
}

fn point(range: std::ops::Range<f64>) -> impl Strategy<Value = Point3> {
    (range.clone(), range.clone(), range).prop_map(|(x, y, z)| Point3::new(x, y, z))
}

proptest! {
    #[test]
    fn cell_volumes_partition_the_box(
        config in any::<u8>(),
        t in params(),
        lo in point(-5.0..5.0),
        size in point(0.1..3.0),
    ) {
        let m = measure_config(Config(config), &t, lo, lo + size).unwrap();
        let bx = size.x * size.y * size.z;
        prop_assert!(m.volume1 >= -1e-12 * bx && m.volume1 <= bx * (1.0 + 1e-12));
        prop_assert!((m.volume0 + m.volume1 - m.box_volume).abs() <= 1e-12 * bx);
        prop_assert!(m.interface_area >= 0.0);
        prop_assert!(validate_watertight(&lookup_table().entry(Config(config)).entry, &t).is_watertight());
    }

    #[test]
    fn scalar_scaling_keeps_measures(values in proptest::array::uniform8(-1.0..1.0f64), k in 0.01..100.0f64) {
        let a = measure_cell(&CellGeometry::unit(values, 0.0).unwrap());
        let b = measure_cell(&CellGeometry::unit(values.map(|v| v * k), 0.0).unwrap());
        prop_assert_eq!(a.config, b.config);
        prop_assert!((a.volume1 - b.volume1).abs() <= 1e-12);
        prop_assert!((a.interface_area - b.interface_area).abs() <= 1e-12);
    }

    #[test]
    fn field_file_round_trip_measures_identically(
        nodes in (2usize..7, 2usize..7, 2usize..7),
        origin in point(-2.0..2.0),
        spacing in point(0.05..1.0),
        seed_values in proptest::collection::vec(-1.0..1.0f64, 343),
        iso in -0.3..0.3f64,
    ) {
        let spec = GridSpec::new([nodes.0, nodes.1, nodes.2], origin, spacing.to_array()).unwrap();
        let field = NodeField::new(spec, seed_values[..spec.node_count()].to_vec()).unwrap();
        let mut buf = Vec::new();
        write_field(&field, &mut buf).unwrap();
        let back = read_field(buf.as_slice()).unwrap();
        prop_assert_eq!(&back, &field);
        prop_assert_eq!(back.measure(iso, true).unwrap(), field.measure(iso, true).unwrap());
    }
}

#[test]
fn exported_mesh_area_matches_engine() {
    let spec = GridSpec::over_domain(Point3::ZERO, Point3::new(2.0, 2.5, 3.0), [23, 19, 27]).unwrap();
    let f = ImplicitField::Ellipsoid {
        center: Point3::new(1.0, 1.3, 1.4),
        radii: Point3::new(0.8, 0.9, 1.2),
    };
    let field = sample_field(&FieldSource::Implicit(f), &spec).unwrap();
    let m = field.measure(0.0, false).unwrap();
    let mesh = field.interface_mesh(0.0).unwrap();
    assert!(mesh.open_edges().is_empty());
    assert!((mesh.area() - m.total_interface_area).abs() <= 1e-12 * m.total_interface_area);
    let n = mesh.normal_integral();
    assert!(n.norm() <= 1e-10 * m.total_interface_area);
    // mesh normals point out of component 1; for this field that is inward
    let mut flux = 0.0;
    for face in &mesh.faces {
        let [a, b, c] = face.map(|i| mesh.vertices[i]);
        flux += a.dot(b.cross(c)) / 6.0;
    }
    assert!((-flux - m.total_volume0).abs() < 1e-10, "{flux} vs {}", m.total_volume0);
}
