//! Lock-free shared access to the model matrices.
//!
//! Workers read and write rows without synchronization. Concurrent updates
//! to the same row may interleave or be lost; SGD tolerates this, but
//! multi-worker runs are not reproducible. With a single worker there is
//! never more than one view and access is ordinary exclusive access.

use std::marker::PhantomData;

use super::kernel::{Params, Table};
use crate::embedding::{EmbeddingModel, Matrix};

struct RawTable {
    ptr: *mut f32,
    rows: usize,
    width: usize,
}

impl RawTable {
    fn new(m: &mut Matrix) -> Self {
        let (rows, width) = (m.rows(), m.cols());
        RawTable { ptr: m.as_mut_slice().as_mut_ptr(), rows, width }
    }
}

pub(crate) struct SharedTables<'a> {
    tables: [RawTable; 3],
    _model: PhantomData<&'a mut EmbeddingModel>,
}

// SAFETY: the pointers come from a mutable borrow of the model that lives as
// long as 'a, so they stay valid while any view exists. Racing element writes
// between workers are the accepted Hogwild trade-off.
unsafe impl Send for SharedTables<'_> {}
unsafe impl Sync for SharedTables<'_> {}

impl<'a> SharedTables<'a> {
    pub(crate) fn new(model: &'a mut EmbeddingModel) -> Self {
        let (w_in, w_out, docs) = model.matrices_mut();
        let tables = [
            RawTable::new(w_in),
            RawTable::new(w_out),
            RawTable::new(docs),
        ];
        SharedTables { tables, _model: PhantomData }
    }

    pub(crate) fn view(&self) -> HogwildView<'_, 'a> {
        HogwildView { shared: self }
    }

    fn raw(&self, table: Table, i: usize) -> (*mut f32, usize) {
        let t = &self.tables[table as usize];
        assert!(i < t.rows, "row {i} out of bounds for {table:?} ({} rows)", t.rows);
        // SAFETY: i < rows, so the offset stays inside the allocation.
        (unsafe { t.ptr.add(i * t.width) }, t.width)
    }
}

/// One worker's handle on the shared tables.
pub(crate) struct HogwildView<'s, 'a> {
    shared: &'s SharedTables<'a>,
}

impl Params<f32> for HogwildView<'_, '_> {
    fn row(&self, table: Table, i: usize) -> &[f32] {
        let (ptr, width) = self.shared.raw(table, i);
        // SAFETY: bounds checked in `raw`; see the module docs for aliasing.
        unsafe { std::slice::from_raw_parts(ptr, width) }
    }

    fn row_mut(&mut self, table: Table, i: usize) -> &mut [f32] {
        let (ptr, width) = self.shared.raw(table, i);
        // SAFETY: as above; within one view only one row borrow is live at a
        // time because of the &mut self receiver.
        unsafe { std::slice::from_raw_parts_mut(ptr, width) }
    }
}
