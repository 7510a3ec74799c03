import unittest

import numpy as np

from src.data import parse_pdb, parse_xyz, read_pdb, write_pdb, write_xyz
from src.data.pdb import parse_atom_line
from src.errors import ParseError
from src.geometry import PointCloud


def atom(serial, name, res_name, chain, res_seq, xyz, occ=1.0, element="", altloc=" ", icode=" ", record="ATOM"):
    padded = name if len(name) >= 4 else f" {name:<3}"
    x, y, z = xyz
    return (
        f"{record:<6}{serial:>5} {padded:<4}{altloc}{res_name:>3} {chain}{res_seq:>4}{icode}   "
        f"{x:8.3f}{y:8.3f}{z:8.3f}{occ:6.2f}{0.0:6.2f}          {element:>2}"
    )


PROTEIN = "\n".join([
    "HEADER    TEST PROTEIN",
    atom(1, "N", "ALA", "A", 1, (0.0, 0.0, 0.0), element="N"),
    atom(2, "CA", "ALA", "A", 1, (1.5, 0.0, 0.0), element="C"),
    atom(3, "C", "ALA", "A", 1, (2.0, 1.4, 0.0), element="C"),
    atom(4, "O", "ALA", "A", 1, (1.3, 2.4, 0.0), element="O"),
    atom(5, "CB", "ALA", "A", 1, (2.0, -0.8, 1.2), element="C"),
    atom(6, "H", "ALA", "A", 1, (0.0, -1.0, 0.0), element="H"),
    atom(7, "N", "GLY", "A", 2, (3.3, 1.5, 0.0), element="N"),
    atom(8, "CA", "GLY", "A", 2, (4.0, 2.7, 0.0), occ=0.4, altloc="A", element="C"),
    atom(9, "CA", "GLY", "A", 2, (4.1, 2.9, 0.3), occ=0.6, altloc="B", element="C"),
    atom(10, "O", "HOH", "A", 100, (9.0, 9.0, 9.0), element="O", record="HETATM"),
    "END",
])


class TestPdbReader(unittest.TestCase):
    def test_heavy_atoms_in_file_order(self):
        (pc,) = parse_pdb(PROTEIN, name="toy")
        self.assertEqual(pc.atom_names, ["N", "CA", "C", "O", "CB", "N", "CA"])
        self.assertEqual(pc.kind, "protein")
        self.assertEqual(pc.name, "toy")
        np.testing.assert_array_equal(pc.residue_index, [0, 0, 0, 0, 0, 1, 1])
        np.testing.assert_array_equal(pc.backbone, [True, True, True, True, False, True, True])
        self.assertEqual(pc.elements[3], "O")

    def test_alternate_location_keeps_highest_occupancy(self):
        (pc,) = parse_pdb(PROTEIN)
        np.testing.assert_allclose(pc.coords[-1], [4.1, 2.9, 0.3])

    def test_equal_occupancy_keeps_first(self):
        text = "\n".join([
            atom(1, "CA", "GLY", "A", 1, (0.0, 0.0, 0.0), occ=0.5, altloc="A"),
            atom(2, "CA", "GLY", "A", 1, (1.0, 0.0, 0.0), occ=0.5, altloc="B"),
        ])
        (pc,) = parse_pdb(text)
        np.testing.assert_allclose(pc.coords, [[0.0, 0.0, 0.0]])

    def test_repeated_names_without_altloc_are_kept(self):
        text = "\n".join([
            atom(1, "C", "UNK", "A", 1, (0.0, 0.0, 0.0)),
            atom(2, "C", "UNK", "A", 1, (1.5, 0.0, 0.0)),
        ])
        (pc,) = parse_pdb(text)
        self.assertEqual(pc.n_atoms, 2)

    def test_insertion_codes_start_new_residues(self):
        text = "\n".join([
            atom(1, "CA", "ALA", "A", 5, (0.0, 0.0, 0.0)),
            atom(2, "CA", "ALA", "A", 5, (3.8, 0.0, 0.0), icode="A"),
            atom(3, "CA", "GLY", "A", 6, (7.6, 0.0, 0.0)),
        ])
        (pc,) = parse_pdb(text)
        np.testing.assert_array_equal(pc.residue_index, [0, 1, 2])

    def test_chains_become_a_complex(self):
        text = "\n".join([
            atom(1, "CA", "ALA", "A", 1, (0.0, 0.0, 0.0)),
            atom(2, "CA", "ALA", "B", 1, (5.0, 0.0, 0.0)),
            atom(3, "CA", "ALA", "B", 2, (8.8, 0.0, 0.0)),
        ])
        (pc,) = parse_pdb(text)
        self.assertEqual(pc.kind, "complex")
        np.testing.assert_array_equal(pc.chain_id, [0, 1, 1])
        np.testing.assert_array_equal(pc.residue_index, [0, 0, 1])

    def test_rna_and_element_inference(self):
        text = "\n".join([
            atom(1, "P", "G", "A", 1, (0.0, 0.0, 0.0)),
            atom(2, "C3'", "G", "A", 1, (1.0, 0.0, 0.0)),
            atom(3, "N7", "G", "A", 1, (2.0, 0.0, 0.0)),
        ])
        (pc,) = parse_pdb(text)
        self.assertEqual(pc.kind, "rna")
        self.assertEqual(pc.elements, ["P", "C", "N"])

    def test_models(self):
        block = [atom(1, "CA", "ALA", "A", 1, (0.0, 0.0, 0.0)), atom(2, "CA", "ALA", "A", 2, (3.8, 0.0, 0.0))]
        text = "\n".join(["MODEL        1", *block, "ENDMDL", "MODEL        2", *block, "ENDMDL"])
        self.assertEqual(len(parse_pdb(text)), 2)

    def test_malformed_records_are_skipped(self):
        bad = atom(3, "CB", "ALA", "A", 1, (0.0, 0.0, 0.0)).replace("   0.000", "     abc", 1)
        result = read_pdb(PROTEIN + "\n" + bad)
        self.assertEqual(result.skipped, 1)
        self.assertEqual(result.models[0].n_atoms, 7)
        with self.assertRaises(ValueError):
            parse_atom_line("ATOM      1  CA")

    def test_no_atoms(self):
        with self.assertRaises(ParseError):
            parse_pdb("HEADER    NOTHING\nEND\n")
        with self.assertRaises(ParseError):
            parse_pdb(atom(1, "H1", "ALA", "A", 1, (0.0, 0.0, 0.0), element="H"))

    def test_write_then_read(self):
        (pc,) = parse_pdb(PROTEIN)
        (again,) = parse_pdb(write_pdb(pc))
        np.testing.assert_allclose(again.coords, pc.coords, atol=1e-3)
        self.assertEqual(again.atom_names, pc.atom_names)
        np.testing.assert_array_equal(again.residue_index, pc.residue_index)
        np.testing.assert_array_equal(again.backbone, pc.backbone)

    def test_write_unannotated_cloud(self):
        pc = PointCloud(np.random.default_rng(0).normal(size=(4, 3)), chain_id=[0, 0, 1, 1])
        (again,) = parse_pdb(write_pdb(pc))
        self.assertEqual(again.n_atoms, 4)
        np.testing.assert_array_equal(again.chain_id, [0, 0, 1, 1])


class TestXyz(unittest.TestCase):
    TEXT = "5\nethanol heavy atoms plus two H\nC 0.0 0.0 0.0\nC 1.52 0.0 0.0\nO 2.0 1.3 0.0\nH -0.5 0.9 0.0\nh 2.9 1.3 0.0\n"

    def test_hydrogens_dropped(self):
        pc = parse_xyz(self.TEXT, name="ethanol")
        self.assertEqual(pc.n_atoms, 3)
        self.assertEqual(pc.elements, ["C", "C", "O"])
        self.assertEqual(pc.kind, "molecule")

    def test_count_mismatch(self):
        with self.assertRaises(ParseError):
            parse_xyz("4\n\nC 0 0 0\n")
        with self.assertRaises(ParseError):
            parse_xyz("two\n\nC 0 0 0\n")
        with self.assertRaises(ParseError):
            parse_xyz("1\n\nC 0 zero 0\n")

    def test_write_then_read(self):
        pc = parse_xyz(self.TEXT)
        again = parse_xyz(write_xyz(pc, "copy"))
        np.testing.assert_allclose(again.coords, pc.coords, atol=1e-8)
        self.assertEqual(again.elements, pc.elements)


if __name__ == "__main__":
    unittest.main()
