/// Applies `f` to every item on up to `jobs` threads; results keep the
/// order of `items`.
pub fn par_map<I: Sync, O: Send>(jobs: usize, items: &[I], f: impl Fn(&I) -> O + Sync) -> Vec<O> {
    let jobs = jobs.max(1).min(items.len().max(1));
    if jobs == 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(jobs);
    let f = &f;
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(f).collect::<Vec<O>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_kept() {
        let items: Vec<u32> = (0..37).collect();
        for jobs in [1, 2, 5, 64] {
            assert_eq!(par_map(jobs, &items, |v| v * v), items.iter().map(|v| v * v).collect::<Vec<_>>());
        }
        assert!(par_map(4, &Vec::<u32>::new(), |v| *v).is_empty());
    }
}
