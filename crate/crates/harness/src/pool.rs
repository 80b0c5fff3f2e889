//! Tiny deterministic worker pool: cells are split into contiguous chunks
//! across scoped threads and the results are concatenated in input order.
//! `WHITNEY_W2P_THREADS` caps the pool.

pub fn thread_count() -> usize {
    if let Ok(v) = std::env::var("WHITNEY_W2P_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn map_cells<I, O, F>(items: Vec<I>, f: F) -> Vec<O>
where
    I: Send + Sync,
    O: Send,
    F: Fn(&I) -> O + Sync,
{
    let n_threads = thread_count().min(items.len().max(1));
    if n_threads <= 1 || items.len() <= 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(n_threads);
    let mut out: Vec<Vec<O>> = Vec::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|slice| scope.spawn(|| slice.iter().map(&f).collect::<Vec<O>>()))
            .collect();
        out = handles.into_iter().map(|h| h.join().expect("worker")).collect();
    });
    out.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let items: Vec<u64> = (0..103).collect();
        let out = map_cells(items.clone(), |x| x * x);
        let expect: Vec<u64> = items.iter().map(|x| x * x).collect();
        assert_eq!(out, expect);
    }
}
