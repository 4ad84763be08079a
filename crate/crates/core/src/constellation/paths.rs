use crate::num::Real;

/// All-pairs minimum-delay routes over the ISL graph of one epoch.
///
/// Ties in delay are broken by hop count; `next` holds the first hop of the
/// chosen route so paths can be replayed for flow accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPaths<T> {
    n: usize,
    delay: Vec<T>,
    hops: Vec<u32>,
    next: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl<T: Real> ShortestPaths<T> {
    /// Floyd–Warshall over a directed edge list `(from, to, delay_ms)`.
    pub fn compute(n: usize, edges: &[(usize, usize, T)]) -> Self {
        let inf = T::infinity();
        let mut delay = vec![inf; n * n];
        let mut hops = vec![NONE; n * n];
        let mut next = vec![NONE; n * n];
        for s in 0..n {
            delay[s * n + s] = T::zero();
            hops[s * n + s] = 0;
            next[s * n + s] = s as u32;
        }
        for &(a, b, d) in edges {
            let idx = a * n + b;
            if d < delay[idx] || (d == delay[idx] && hops[idx] > 1) {
                delay[idx] = d;
                hops[idx] = 1;
                next[idx] = b as u32;
            }
        }
        for k in 0..n {
            for i in 0..n {
                let ik = i * n + k;
                if hops[ik] == NONE {
                    continue;
                }
                for j in 0..n {
                    let kj = k * n + j;
                    if hops[kj] == NONE {
                        continue;
                    }
                    let ij = i * n + j;
                    let cand = delay[ik] + delay[kj];
                    let cand_hops = hops[ik] + hops[kj];
                    if cand < delay[ij] || (cand == delay[ij] && cand_hops < hops[ij]) {
                        delay[ij] = cand;
                        hops[ij] = cand_hops;
                        next[ij] = next[ik];
                    }
                }
            }
        }
        Self {
            n,
            delay,
            hops,
            next,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Minimum propagation delay in ms, or `None` if unreachable.
    #[inline]
    pub fn delay(&self, a: usize, b: usize) -> Option<T> {
        let d = self.delay[a * self.n + b];
        d.is_finite().then_some(d)
    }

    /// Raw delay: `+inf` for unreachable pairs.
    #[inline]
    pub fn delay_or_inf(&self, a: usize, b: usize) -> T {
        self.delay[a * self.n + b]
    }

    #[inline]
    pub fn hops(&self, a: usize, b: usize) -> Option<u32> {
        let h = self.hops[a * self.n + b];
        (h != NONE).then_some(h)
    }

    /// Node sequence of the chosen route, endpoints included.
    pub fn path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        if self.hops[a * self.n + b] == NONE {
            return None;
        }
        let mut out = vec![a];
        let mut cur = a;
        while cur != b {
            cur = self.next[cur * self.n + b] as usize;
            out.push(cur);
        }
        Some(out)
    }

    /// Calls `f(u, v)` for each traversed link of the route from `a` to `b`.
    /// Returns `false` when `b` is unreachable.
    #[inline]
    pub fn for_each_link(&self, a: usize, b: usize, mut f: impl FnMut(usize, usize)) -> bool {
        if self.hops[a * self.n + b] == NONE {
            return false;
        }
        let mut cur = a;
        while cur != b {
            let nxt = self.next[cur * self.n + b] as usize;
            f(cur, nxt);
            cur = nxt;
        }
        true
    }
}
