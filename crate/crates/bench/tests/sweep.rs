use adaptix::WorkerPool;
use adaptix_bench::{emit_csv, run_sweep, BenchError, PolicyKind, SweepSpec, Workload};

fn spec(workload: Workload) -> SweepSpec {
    SweepSpec {
        workload,
        sizes: vec![64, 1024, 4096],
        cores: vec![1, 2],
        chunks_per_core: vec![1, 8],
        adaptive: true,
        repetitions: 2,
        work_units: 20,
    }
}

fn key(r: &adaptix_bench::BenchmarkRecord) -> (usize, PolicyKind, usize, usize) {
    (r.n_elements, r.policy, r.cores, r.chunks_per_core)
}

#[test]
fn baseline_only_sweep() {
    let pool = WorkerPool::create(Some(2)).unwrap();
    let spec = SweepSpec {
        sizes: vec![1000],
        cores: vec![],
        chunks_per_core: vec![],
        adaptive: false,
        repetitions: 1,
        ..spec(Workload::AdjacentDifference)
    };
    let out = run_sweep(&spec, &pool).unwrap();
    assert_eq!(out.records.len(), 1);
    let r = &out.records[0];
    assert_eq!(r.policy, PolicyKind::Sequential);
    assert_eq!(r.speedup_vs_sequential, 1.0);
    assert_eq!(r.samples.len(), 1);
}

#[test]
fn ordering_is_reproducible_and_sequential_is_unit_speedup() {
    let pool = WorkerPool::create(Some(2)).unwrap();
    for workload in [Workload::AdjacentDifference, Workload::ArtificialWork] {
        let a = run_sweep(&spec(workload), &pool).unwrap();
        let b = run_sweep(&spec(workload), &pool).unwrap();
        let ka: Vec<_> = a.records.iter().map(key).collect();
        let kb: Vec<_> = b.records.iter().map(key).collect();
        assert_eq!(ka, kb);
        // per size: sequential, static (1,1) (1,8) (2,1) (2,8), adaptive
        assert_eq!(a.records.len(), 3 * 6);
        let mut sorted = ka.clone();
        sorted.sort();
        assert_eq!(
            ka.iter().map(|k| (k.0, k.1)).collect::<Vec<_>>(),
            sorted.iter().map(|k| (k.0, k.1)).collect::<Vec<_>>()
        );
        for r in &a.records {
            assert!(r.speedup_vs_sequential > 0.0);
            if r.policy == PolicyKind::Sequential {
                assert_eq!(r.speedup_vs_sequential, 1.0);
            }
            if r.policy == PolicyKind::Adaptive {
                assert!((1..=2).contains(&r.cores));
            }
        }
    }
}

#[test]
fn oversized_core_arms_are_skipped() {
    let pool = WorkerPool::create(Some(2)).unwrap();
    let spec = SweepSpec {
        sizes: vec![256],
        cores: vec![2, 64],
        chunks_per_core: vec![4],
        adaptive: false,
        ..spec(Workload::ArtificialWork)
    };
    let out = run_sweep(&spec, &pool).unwrap();
    assert_eq!(out.records.len(), 2);
    assert_eq!(out.skipped.len(), 1);
    assert_eq!(out.skipped[0].cores, 64);
}

#[test]
fn invalid_specs_rejected() {
    let pool = WorkerPool::create(Some(1)).unwrap();
    let bad = [
        SweepSpec {
            sizes: vec![],
            ..spec(Workload::ArtificialWork)
        },
        SweepSpec {
            cores: vec![0],
            ..spec(Workload::ArtificialWork)
        },
        SweepSpec {
            repetitions: 0,
            ..spec(Workload::ArtificialWork)
        },
        SweepSpec {
            chunks_per_core: vec![0],
            ..spec(Workload::ArtificialWork)
        },
    ];
    for s in bad {
        assert!(matches!(run_sweep(&s, &pool), Err(BenchError::Spec(_))));
    }
}

#[test]
fn unwritable_path_is_io_error() {
    let pool = WorkerPool::create(Some(1)).unwrap();
    let spec = SweepSpec {
        sizes: vec![16],
        cores: vec![],
        adaptive: false,
        repetitions: 1,
        ..spec(Workload::AdjacentDifference)
    };
    let out = run_sweep(&spec, &pool).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no/such/dir/out.csv");
    assert!(matches!(
        emit_csv(&out.records, &missing),
        Err(BenchError::Io(_))
    ));
    let ok = dir.path().join("out.csv");
    emit_csv(&out.records, &ok).unwrap();
    let text = std::fs::read_to_string(ok).unwrap();
    assert!(text.starts_with("workload,n_elements,policy,"));
    assert_eq!(text.lines().count(), 2);
}
