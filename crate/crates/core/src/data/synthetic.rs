use crate::instance::{ClassId, Instance};

/// 1024 objects, 4 classes, 10 binary tests. Object `m` answers test `i`
/// with bit `9 − i` of `m`, so `t1` is the most significant bit. Objects in
/// `[1,255]`, `[257,511]`, `[513,767]`, `[769,1023]` get classes 0..3; the
/// four boundary objects 0, 256, 512, 768 get classes 1, 2, 3, 0.
pub fn gen_synthetic_outlier() -> Instance {
    let mut classes = Vec::with_capacity(1024);
    let mut rows = Vec::with_capacity(1024);
    for m in 0..1024usize {
        let block = m / 256;
        let class: ClassId = if m % 256 == 0 { (block + 1) % 4 } else { block };
        classes.push(class);
        rows.push((0..10).map(|i| (m >> (9 - i)) & 1).collect());
    }
    Instance::from_rows(&classes, &rows, 4).expect("outlier instance is well formed")
}

/// 60 objects in two classes of 30 with two binary tests. `t1` splits the
/// set into class counts (30,10) and (0,20); `t2` into (15,15) and (15,15).
/// With `complete`, 60 one-hot tests are appended so that every object can
/// be isolated; they are weak enough not to change the root choice.
pub fn gen_fig1(complete: bool) -> Instance {
    let mut classes = Vec::with_capacity(60);
    let mut rows = Vec::with_capacity(60);
    for id in 0..60usize {
        let class = usize::from(id >= 30);
        let t1 = usize::from(id >= 40);
        let t2 = usize::from(if class == 0 { id >= 15 } else { id >= 45 });
        let mut row = vec![t1, t2];
        if complete {
            row.extend((0..60).map(|j| usize::from(j == id)));
        }
        classes.push(class);
        rows.push(row);
    }
    Instance::from_rows(&classes, &rows, 2).expect("two-test instance is well formed")
}
