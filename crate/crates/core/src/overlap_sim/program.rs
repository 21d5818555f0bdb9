/// PU operation performed by one stage activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    F,
    G,
}

/// One clock's worth of work for a single path on the tree decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub stage: usize,
    pub kind: Activation,
    /// Bit whose LLR this activation produces (stage 1 only); it is decided
    /// combinationally in the same cycle.
    pub decides: Option<usize>,
}

/// Depth-first activation sequence of the tree SC decoder for `m` stages.
/// Partial sums are computed alongside and are not billed; length is `2n - 2`.
pub fn sc_program(m: usize) -> Vec<Step> {
    fn node(s: usize, offset: usize, out: &mut Vec<Step>) {
        let half = 1 << (s - 1);
        let leaf = |b: usize| (s == 1).then_some(b);
        out.push(Step {
            stage: s,
            kind: Activation::F,
            decides: leaf(offset),
        });
        if s > 1 {
            node(s - 1, offset, out);
        }
        out.push(Step {
            stage: s,
            kind: Activation::G,
            decides: leaf(offset + 1),
        });
        if s > 1 {
            node(s - 1, offset + half, out);
        }
    }
    let mut out = Vec::with_capacity((2usize << m).saturating_sub(2));
    if m > 0 {
        node(m, 0, &mut out);
    }
    out
}
