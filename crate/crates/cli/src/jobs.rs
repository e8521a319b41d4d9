use std::thread;

use m3t_core::Result;

/// Apply `f` to every item on up to `jobs` threads, keeping input order.
/// Each worker builds its own state with `init`, so non-`Send` values such
/// as a loaded network stay on one thread.
pub fn map_ordered<T, S, R, I, F>(items: &[T], jobs: usize, init: I, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    I: Fn() -> Result<S> + Sync,
    F: Fn(&mut S, &T) -> Result<R> + Sync,
{
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        let mut state = init()?;
        return items.iter().map(|x| f(&mut state, x)).collect();
    }
    let chunk = items.len().div_ceil(jobs);
    let parts: Vec<Result<Vec<R>>> = thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| {
                let (init, f) = (&init, &f);
                scope.spawn(move || {
                    let mut state = init()?;
                    part.iter().map(|x| f(&mut state, x)).collect()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(items.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}
