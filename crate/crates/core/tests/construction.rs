use fastescape::dimension::mcmullen_trend;
use fastescape::function::{canonical, FamilyParams};
use fastescape::islands::TraceConfig;
use fastescape::nesting::{construct, sector_diameter, ConstructConfig};
use fastescape::{Error, Frame};

fn small_config() -> ConstructConfig<f64> {
    ConstructConfig {
        c1: 1e-2,
        trace: TraceConfig {
            mesh: 128,
            ..TraceConfig::default()
        },
        koebe_samples: 100,
        distortion_samples: 4,
        ..ConstructConfig::new(1e6, 30.0)
    }
}

#[test]
fn two_level_construction_at_a_million() {
    let f = canonical("cosh-sqrt", &FamilyParams::default()).unwrap();
    let frame = Frame::default();
    let c = construct(&f, &frame, &small_config()).unwrap();
    assert_eq!(c.islands.len(), c.m);
    assert!(c.all_pass());

    // Islands from distinct centres are disjoint because their discs are.
    for (i, a) in c.islands.iter().enumerate() {
        for b in &c.islands[i + 1..] {
            assert!((a.b - b.b).norm() > 2.0 * c.t);
            assert!(a.boundary.iter().all(|v| (v - b.b).norm() > b.t));
        }
    }

    let l1 = &c.levels[0];
    let total: f64 = c.islands.iter().map(|i| i.area).sum();
    assert!((l1.density - total / frame.t_area(1e6)).abs() <= 1e-12 * l1.density);
    assert!(l1.density_margin >= 0.0);

    let l2 = &c.levels[1];
    assert!(l2.synthetic && l2.all_contained);
    assert!(l2.fdiam_margin.unwrap() >= 0.0);
    assert!(l2.max_child_diameter < l1.max_child_diameter);
    assert!(c.next_level_precision > 0.0);

    let levels = c.nesting_levels(&frame).unwrap();
    assert!(levels.iter().all(|l| l.log_d.is_negative()));
    let unit = sector_diameter(&frame, 1e6);
    assert!((levels[0].log_d.to_real() - (l1.max_child_diameter / unit).ln()).abs() < 1e-12);
    assert_eq!(mcmullen_trend(&levels).unwrap().len(), 2);
}

#[test]
fn retracing_is_deterministic() {
    let f = canonical("cosh-sqrt", &FamilyParams::default()).unwrap();
    let frame = Frame::default();
    let cfg = ConstructConfig {
        levels: 1,
        ..small_config()
    };
    let a = construct(&f, &frame, &cfg).unwrap();
    let b = construct(&f, &frame, &cfg).unwrap();
    for (x, y) in a.islands.iter().zip(&b.islands) {
        assert_eq!(x.boundary, y.boundary);
    }
}

#[test]
fn oversized_nu_cannot_pack() {
    let f = canonical("cosh-sqrt", &FamilyParams::default()).unwrap();
    let cfg = ConstructConfig {
        nu: 1e3,
        c1: 1e9,
        ..small_config()
    };
    assert!(matches!(
        construct(&f, &Frame::default(), &cfg),
        Err(Error::PackingImpossible(_))
    ));
    let deep = ConstructConfig {
        levels: 3,
        ..small_config()
    };
    assert!(matches!(
        construct(&f, &Frame::default(), &deep),
        Err(Error::InvalidArgument(_))
    ));
}
