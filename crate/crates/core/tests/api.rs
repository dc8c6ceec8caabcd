use abcage::dynamics::{auto_chain, cage_extent};
use abcage::gauge::{shift_family, u2_model};
use abcage::lattice::{band_structure, build_real_space, flatness_metric};
use abcage::{Boundary, LatticeSpec32, LinkSet32, LinkSet64, ModeIndex, Orientation, Site};

#[test]
fn single_precision_bands_are_flat() {
    let links: LinkSet32 = u2_model();
    let bands = band_structure(&links, Orientation::Leftward, 17).unwrap();
    assert!(flatness_metric(&bands).iter().all(|w| *w < 1e-5));
}

#[test]
fn single_precision_chain_is_hermitian() {
    let links: LinkSet32 = u2_model();
    let model = build_real_space(LatticeSpec32::new(2, 7, Boundary::Periodic, 1.0), &links).unwrap();
    let h = model.hamiltonian_in_j();
    assert_eq!(h.nrows(), 7 * 3 * 2);
    assert!((&h - h.adjoint()).camax() < 1e-6);
}

#[test]
fn link_document_round_trips_through_json() {
    let links: LinkSet64 = shift_family(3).unwrap();
    let json = serde_json::to_string(&links.to_doc()).unwrap();
    let back = LinkSet64::from_doc(&serde_json::from_str(&json).unwrap()).unwrap();
    assert_eq!(back.to_doc(), links.to_doc());
}

#[test]
fn orientations_mirror_the_cage() {
    let links: LinkSet64 = shift_family(3).unwrap();
    let start = ModeIndex::new(0, Site::A, 1);
    let edges = |o| {
        let r = cage_extent(&auto_chain(&links, o).unwrap(), start, 30.0, 1e-6).unwrap();
        (r.left_edge, r.right_edge)
    };
    let (l, r) = edges(Orientation::Rightward);
    assert_eq!(edges(Orientation::Leftward), (-r, -l));
}
