import numpy as np
import pytest

from ipmrsm import Dataset, ingest_csv
from ipmrsm.exceptions import InputError


def write(tmp_path, text):
    p = tmp_path / "d.csv"
    p.write_text(text)
    return p


def test_one_row(tmp_path):
    d = ingest_csv(write(tmp_path, "x1,x2,y\n1,1,7.24\n"))
    assert d.n_rows == 1 and d.k == 2
    assert d.y.tolist() == [7.24]


def test_case_insensitive_and_extra_columns(tmp_path):
    d = ingest_csv(write(tmp_path, "Y,X2,note,X1,dim\n3,2,a,1,40\n"))
    assert d.X.tolist() == [[1.0, 2.0]] and d.y.tolist() == [3.0]
    dim = ingest_csv(write(tmp_path, "Y,X2,note,X1,dim\n3,2,a,1,40\n"), response="dim")
    assert dim.y.tolist() == [40.0]


def test_nonpositive_factor(tmp_path):
    with pytest.raises(InputError, match=r"x1 must be positive \(row 1\)"):
        ingest_csv(write(tmp_path, "x1,x2,y\n0,2,5.1\n"))


def test_nonpositive_response(tmp_path):
    with pytest.raises(InputError, match=r"y must be positive \(row 2\)"):
        ingest_csv(write(tmp_path, "x1,x2,y\n1,2,5.1\n1,1,-1\n"))


def test_missing_column(tmp_path):
    with pytest.raises(InputError, match="missing column"):
        ingest_csv(write(tmp_path, "x1,x3,y\n1,2,3\n"))
    with pytest.raises(InputError, match="missing column"):
        ingest_csv(write(tmp_path, "x1,x2\n1,2\n"))


def test_malformed_number(tmp_path):
    with pytest.raises(InputError, match=r"row 1"):
        ingest_csv(write(tmp_path, "x1,x2,y\n1,abc,3\n"))


def test_missing_file(tmp_path):
    with pytest.raises(InputError):
        ingest_csv(tmp_path / "nope.csv")


def test_grid_fixture(data_dir):
    d = ingest_csv(data_dir / "grid4x4_noiseless.csv")
    assert d.n_rows == 16
    assert sorted(set(d.X[:, 0])) == [1, 2, 3, 4]


def test_dataset_immutable():
    d = Dataset(np.ones((2, 2)), [1.0, 2.0])
    with pytest.raises(ValueError):
        d.y[0] = 5.0
