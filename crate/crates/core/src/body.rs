use std::ops::Range;

/// Per-element work of a data-parallel loop, invoked on half-open index
/// ranges. Distinct indices must not depend on each other; the executor may
/// run disjoint ranges concurrently.
pub trait LoopBody: Sync {
    fn run(&self, range: Range<usize>);
}

impl<F> LoopBody for F
where
    F: Fn(Range<usize>) + Sync,
{
    fn run(&self, range: Range<usize>) {
        self(range)
    }
}

/// Runs `body` over `range` shifted by `offset`.
pub(crate) struct Shifted<'a, B: ?Sized> {
    pub(crate) body: &'a B,
    pub(crate) offset: usize,
}

impl<B: LoopBody + ?Sized> LoopBody for Shifted<'_, B> {
    fn run(&self, range: Range<usize>) {
        self.body
            .run(range.start + self.offset..range.end + self.offset)
    }
}
