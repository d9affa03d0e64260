use num_traits::Zero;

use crate::rational::Rational;

/// Some solution of `A x = b` with unrestricted signs, or `None` if the system
/// is inconsistent. Gauss-Jordan elimination; free variables are set to zero.
pub fn solve_affine(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let mut rows: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut r = r.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Rational::from_integer(1.into()) / &rows[r][c];
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[n].is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = rows[i][n].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn underdetermined_and_inconsistent() {
        let a = vec![vec![int(1), int(1)], vec![int(2), int(2)]];
        let x = solve_affine(&a, &[int(3), int(6)]).unwrap();
        assert_eq!(&x[0] + &x[1], int(3));
        assert!(solve_affine(&a, &[int(3), int(5)]).is_none());
    }

    #[test]
    fn negative_solution_allowed() {
        let a = vec![vec![int(1), int(0)], vec![int(0), int(1)]];
        assert_eq!(solve_affine(&a, &[int(-2), int(5)]).unwrap(), vec![int(-2), int(5)]);
    }
}
