//! Replica-indexed parallel map. Results come back in replica order whatever the
//! worker count, so reductions over them are reproducible.

use std::thread;

/// `f(state, i)` for `i in 0..count`, spread over `workers` threads; each thread builds
/// its own `state` with `init`.
pub fn par_map_with<S, T, I, F>(count: usize, workers: usize, init: I, f: F) -> Vec<T>
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, usize) -> T + Sync,
    T: Send,
{
    let workers = workers.clamp(1, count.max(1));
    if workers == 1 {
        let mut state = init();
        return (0..count).map(|i| f(&mut state, i)).collect();
    }
    let mut slots: Vec<Option<T>> = (0..count).map(|_| None).collect();
    thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (init, f) = (&init, &f);
                scope.spawn(move || {
                    let mut state = init();
                    (w..count)
                        .step_by(workers)
                        .map(|i| (i, f(&mut state, i)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, t) in h.join().expect("worker panicked") {
                slots[i] = Some(t);
            }
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("every replica ran"))
        .collect()
}

pub fn par_map<T, F>(count: usize, workers: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync,
    T: Send,
{
    par_map_with(count, workers, || (), |_, i| f(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_independent_of_workers() {
        let one = par_map(37, 1, |i| i * i);
        for w in [2, 3, 8, 100] {
            assert_eq!(par_map(37, w, |i| i * i), one);
        }
        assert!(par_map(0, 4, |i| i).is_empty());
    }
}
