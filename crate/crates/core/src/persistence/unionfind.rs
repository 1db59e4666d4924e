/// Disjoint sets over `0..n` with a per-root tag that survives unions.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    tag: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            tag: vec![0; n],
        }
    }

    /// Each element starts as its own root tagged with `tag(i)`.
    pub fn with_tags(n: usize, tag: impl Fn(usize) -> u32) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            tag: (0..n).map(tag).collect(),
        }
    }

    #[inline]
    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    #[inline]
    pub fn tag(&self, root: u32) -> u32 {
        self.tag[root as usize]
    }

    /// Merge two distinct roots; the merged root carries `tag`.
    #[inline]
    pub fn union_roots(&mut self, a: u32, b: u32, tag: u32) -> u32 {
        let (big, small) = if self.size[a as usize] >= self.size[b as usize] {
            (a, b)
        } else {
            (b, a)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        self.tag[big as usize] = tag;
        big
    }

    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let t = self.tag(ra);
        self.union_roots(ra, rb, t);
        true
    }

    pub fn set_size(&mut self, x: u32) -> u32 {
        let r = self.find(x);
        self.size[r as usize]
    }
}
