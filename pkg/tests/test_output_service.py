import io

import pytest
from mpmath import mp, mpf

from app.schemas.centered import CenteredRow
from app.schemas.lambda_record import LambdaForm, LambdaRecord
from app.services.lambda_service import lambda_service
from app.services.output_service import format_fixed, open_output, output_service


def record(n, value, delta):
    with mp.workdps(30):
        return LambdaRecord(n=n, value=mpf(value), delta=mpf(delta), form=LambdaForm.DIRECT, digits_used=30)


@pytest.mark.parametrize("value, decimals, expected", [
    ("0.069176395771", 5, "0.06918"),
    ("8.428662659671506", 12, "8.428662659672"),
    ("-0.000485565", 6, "-0.000486"),
    ("2.5", 0, "2"),
    ("3.5", 0, "4"),
    ("0", 3, "0.000"),
    ("-1e-10", 3, "0.000"),
    ("123456.25", 1, "123456.2"),
])
def test_format_fixed(value, decimals, expected):
    with mp.workdps(30):
        assert format_fixed(mpf(value), decimals) == expected


def test_lambda_csv():
    records = [record(1, "0.069176395771", "0.852933506245"), record(2, "0.22745427267", "0.317949572")]
    stream = io.StringIO()
    assert output_service.write_lambda_csv(records, stream, 4) == 2
    lines = stream.getvalue().splitlines()
    assert lines[0] == "n,lambda,delta,n_avg_delta"
    assert lines[1] == "1,0.0692,0.8529,"
    # 2 · ½(0.317949572 + 0.852933506245)
    assert lines[2] == "2,0.2275,0.3179,1.1709"


def test_lambda_csv_gap_leaves_average_blank():
    records = [record(3, "0.45671413349", "0.1"), record(5, "0.8", "0.2")]
    rows = output_service.lambda_rows(records, 3)
    assert [row["n_avg_delta"] for row in rows] == ["", ""]


def test_centered_csv():
    with mp.workdps(30):
        rows = [CenteredRow(n=1, value=mpf("0.0881540"), remainder=mpf("0.871911"))]
    stream = io.StringIO()
    assert output_service.write_centered_csv(rows, stream, 3) == 1
    assert stream.getvalue() == "n,centered_lambda,remainder\n1,0.088,0.872\n"


def test_open_output_file(tmp_path):
    path = tmp_path / "sub" / "out.csv"
    with open_output(str(path)) as stream:
        stream.write("x\n")
    assert path.read_text(encoding="utf-8") == "x\n"


def test_open_output_stdout(capsys):
    with open_output(None) as stream:
        stream.write("y\n")
    assert capsys.readouterr().out == "y\n"


def test_format_fixed_keeps_working_precision():
    # 调用处不设 workdps, 默认 15 位精度不应截断高精度值
    value = lambda_service.compute(1, 30).value
    assert format_fixed(value, 30) == "0.069176395771935724122273171646"
    assert format_fixed("0.12345678901234567890123456789", 28) == "0.1234567890123456789012345679"


def test_format_fixed_last_digit_above_one():
    with mp.workdps(40):
        value = mpf("8.5245234873967894999")
    assert format_fixed(value, 15) == "8.524523487396789"
