//! Problems represented by their effect vectors, compared by cosine similarity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fanova::EffectDecomposition;
use crate::format::sig12;
use crate::report::EffectRow;

/// `C(n,1) + C(n,2) + C(n,3)`.
pub fn effect_vector_len(n_modules: usize) -> usize {
    let n = n_modules;
    n + n * n.saturating_sub(1) / 2 + n * n.saturating_sub(1) * n.saturating_sub(2) / 6
}

/// Fractions of every subset of size at most three, in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectVector {
    pub problem_id: u32,
    pub values: Vec<f64>,
}

impl EffectVector {
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

pub fn effect_vector(d: &EffectDecomposition, problem_id: u32) -> Result<EffectVector> {
    let n = d.space.n_modules();
    if d.max_order < 3.min(n) {
        return Err(Error::InvalidOrder {
            max_order: d.max_order,
            n_modules: n,
        });
    }
    Ok(EffectVector {
        problem_id,
        values: d
            .iter()
            .filter(|(k, _)| k.order() <= 3)
            .map(|(_, f)| f)
            .collect(),
    })
}

/// Effect vector from the rows of an effects CSV (percentages).
pub fn effect_vector_from_rows(rows: &[EffectRow], problem_id: u32) -> Result<EffectVector> {
    let mut values = Vec::new();
    let mut last_order = 0;
    for r in rows.iter().filter(|r| r.order <= 3) {
        if r.order < last_order {
            return Err(Error::MalformedEffects(
                "rows are not in canonical subset order".into(),
            ));
        }
        last_order = r.order;
        values.push(r.fraction_percent / 100.0);
    }
    Ok(EffectVector { problem_id, values })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cosine {
    pub value: f64,
    /// Either vector had zero norm; `value` is then 0.
    pub degenerate: bool,
}

pub fn cosine_similarity(a: &EffectVector, b: &EffectVector) -> Result<Cosine> {
    if a.values.len() != b.values.len() {
        return Err(Error::LengthMismatch {
            left: a.values.len(),
            right: b.values.len(),
        });
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        log::warn!(
            "zero effect vector for problem {}; similarity defined as 0",
            if na == 0.0 { a.problem_id } else { b.problem_id }
        );
        return Ok(Cosine {
            value: 0.0,
            degenerate: true,
        });
    }
    let dot: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    Ok(Cosine {
        value: (dot / (na * nb)).clamp(-1.0, 1.0),
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub problem_ids: Vec<u32>,
    pub values: Vec<Vec<f64>>,
    /// Problems whose effect vector is zero.
    pub degenerate: Vec<u32>,
}

impl SimilarityMatrix {
    pub fn get(&self, a: u32, b: u32) -> Option<f64> {
        let i = self.problem_ids.iter().position(|&p| p == a)?;
        let j = self.problem_ids.iter().position(|&p| p == b)?;
        Some(self.values[i][j])
    }

    /// `problem_id,<id>...` header, one row per problem.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["problem_id".to_string()];
        header.extend(self.problem_ids.iter().map(u32::to_string));
        w.write_record(&header)?;
        for (id, row) in self.problem_ids.iter().zip(&self.values) {
            let mut rec = vec![id.to_string()];
            rec.extend(row.iter().map(|&x| sig12(x)));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

pub fn similarity_matrix(vectors: &[EffectVector]) -> Result<SimilarityMatrix> {
    let n = vectors.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let c = cosine_similarity(&vectors[i], &vectors[j])?.value;
            values[i][j] = c;
            values[j][i] = c;
        }
    }
    Ok(SimilarityMatrix {
        problem_ids: vectors.iter().map(|v| v.problem_id).collect(),
        values,
        degenerate: vectors
            .iter()
            .filter(|v| v.norm() == 0.0)
            .map(|v| v.problem_id)
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(id: u32, values: &[f64]) -> EffectVector {
        EffectVector {
            problem_id: id,
            values: values.to_vec(),
        }
    }

    #[test]
    fn lengths() {
        assert_eq!(effect_vector_len(6), 41);
        assert_eq!(effect_vector_len(7), 63);
        assert_eq!(effect_vector_len(2), 3);
    }

    #[test]
    fn basic_cosines() {
        let a = ev(1, &[0.2, 0.3, 0.5]);
        assert!((cosine_similarity(&a, &a).unwrap().value - 1.0).abs() < 1e-15);
        let b = ev(2, &[0.0, 0.0, 0.7]);
        let c = ev(3, &[0.4, 0.6, 0.0]);
        assert_eq!(cosine_similarity(&b, &c).unwrap().value, 0.0);
        let zero = ev(4, &[0.0; 3]);
        let z = cosine_similarity(&a, &zero).unwrap();
        assert!(z.degenerate && z.value == 0.0);
        assert!(cosine_similarity(&a, &ev(5, &[1.0])).is_err());
    }

    #[test]
    fn matrices() {
        let m = similarity_matrix(&[ev(5, &[0.1, 0.2])]).unwrap();
        assert_eq!(m.values, vec![vec![1.0]]);
        let ortho = similarity_matrix(&[
            ev(1, &[1.0, 0.0, 0.0]),
            ev(2, &[0.0, 2.0, 0.0]),
            ev(3, &[0.0, 0.0, 0.5]),
        ])
        .unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(ortho.values[i][j], if i == j { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(
            ortho.to_csv().unwrap(),
            "problem_id,1,2,3\n1,1,0,0\n2,0,1,0\n3,0,0,1\n"
        );
        assert!(similarity_matrix(&[ev(1, &[1.0]), ev(2, &[1.0, 0.0])]).is_err());
    }

    proptest! {
        #[test]
        fn matrix_properties(
            rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 8), 1..6),
            scale in 0.01f64..100.0,
        ) {
            let vs: Vec<_> = rows.iter().enumerate().map(|(i, r)| ev(i as u32, r)).collect();
            let m = similarity_matrix(&vs).unwrap();
            for i in 0..vs.len() {
                if vs[i].norm() > 0.0 {
                    prop_assert!((m.values[i][i] - 1.0).abs() < 1e-12);
                }
                for j in 0..vs.len() {
                    prop_assert_eq!(m.values[i][j], m.values[j][i]);
                    prop_assert!((0.0..=1.0).contains(&m.values[i][j]));
                }
            }
            let mut scaled = vs.clone();
            scaled[0].values.iter_mut().for_each(|x| *x *= scale);
            let ms = similarity_matrix(&scaled).unwrap();
            for j in 0..vs.len() {
                prop_assert!((ms.values[0][j] - m.values[0][j]).abs() < 1e-12);
            }
        }
    }
}
