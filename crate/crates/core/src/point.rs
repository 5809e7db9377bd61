/// A point of `Z^d`.
pub type Point = Vec<i64>;

pub(crate) fn add(a: &[i64], b: &[i64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn sub(a: &[i64], b: &[i64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn scale(a: &[i64], k: i64) -> Point {
    a.iter().map(|x| x * k).collect()
}

pub(crate) fn neg(a: &[i64]) -> Point {
    a.iter().map(|x| -x).collect()
}

pub(crate) fn is_zero(a: &[i64]) -> bool {
    a.iter().all(|&x| x == 0)
}

pub(crate) fn sup_norm(a: &[i64]) -> i64 {
    a.iter().map(|x| x.abs()).max().unwrap_or(0)
}

/// Points of the cube `[-r, r]^d` with sup-norm exactly `r`, in lexicographic order.
pub(crate) fn shell(d: usize, r: i64) -> Vec<Point> {
    let mut out = Vec::new();
    let mut cur = vec![-r; d];
    if d == 0 {
        if r == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    loop {
        if sup_norm(&cur) == r {
            out.push(cur.clone());
        }
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < r {
                cur[i] += 1;
                for c in cur.iter_mut().skip(i + 1) {
                    *c = -r;
                }
                break;
            }
        }
    }
}

/// Lattice points enumerated by increasing sup-norm, lexicographic inside a shell.
pub(crate) fn shells(d: usize) -> impl Iterator<Item = Point> {
    (0i64..).flat_map(move |r| shell(d, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shell_sizes() {
        assert_eq!(shell(2, 0), vec![vec![0, 0]]);
        assert_eq!(shell(2, 1).len(), 8);
        assert_eq!(shell(3, 2).len(), 125 - 27);
        assert_eq!(shell(2, 1)[0], vec![-1, -1]);
    }

    #[test]
    fn shells_start_at_origin() {
        let first: Vec<Point> = shells(1).take(3).collect();
        assert_eq!(first, vec![vec![0], vec![-1], vec![1]]);
    }
}
