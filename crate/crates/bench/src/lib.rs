//! Fixed workloads shared by the benchmarks.

use condtrack::{kostlan_sample, start_pair, track, HomSystem, Homotopy, ProjPoint, TrackerConfig};

/// A random target of the given shape and a point near one of its zeros,
/// found by tracking from the start pair.
pub struct Workload {
    pub target: HomSystem,
    pub homotopy: Homotopy,
    pub start: ProjPoint,
    pub zero: ProjPoint,
}

impl Workload {
    pub fn new(n: usize, degree: u32, seed: u64) -> Self {
        let degrees = vec![degree; n];
        let target = kostlan_sample(n, &degrees, seed).expect("valid shape");
        let (f, start) = start_pair(n, &degrees).expect("valid shape");
        let homotopy = Homotopy::great_circle(&f, &target).expect("same shape");
        let res = track(&homotopy, &start, &TrackerConfig::default()).expect("valid config");
        assert!(res.success(), "workload ({n}, {degree}, {seed}) did not track: {:?}", res.failure);
        let zero = res.final_point().clone();
        Workload {
            target,
            homotopy,
            start,
            zero,
        }
    }
}

/// Shapes used across benchmark groups: `(n, degree)`.
pub const SHAPES: [(usize, u32); 3] = [(1, 3), (2, 2), (3, 2)];
