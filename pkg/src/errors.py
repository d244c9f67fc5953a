'''
Every error carries a witness. `payload()` is what lands in the JSON report,
so an independent checker can see exactly which index pair, eigenvalue or
field triggered it.

`InputError`s mean the request was malformed (CLI exit code 2), while
`VerificationError`s mean a mathematical precondition failed on
well-formed input (exit code 1).
'''

from typing import Any, Dict


class PforgeError(Exception):
    def __init__(self, message: str, **witness: Any):
        super().__init__(message)
        self.witness = witness

    def payload(self) -> Dict[str, Any]:
        return {
            'error': type(self).__name__,
            'message': str(self),
            'witness': self.witness,
        }


class InputError(PforgeError):
    pass


class DimensionMismatch(InputError):
    pass


class RankDeficientBasis(InputError):
    pass


class UnknownCatalogEntry(InputError):
    pass


class InvalidParams(InputError):
    pass


class ZeroParameter(InputError):
    pass


class MalformedInput(InputError):
    'The witness `pointer` is a JSON-pointer-ish path to the bad field.'


class VerificationError(PforgeError):
    pass


class NotASubalgebra(VerificationError):
    pass


class StabilizerNotClosed(VerificationError):
    'Mathematically impossible, so seeing this means a bug.'


class NotARepresentation(VerificationError):
    pass


class NotDirectSum(VerificationError):
    pass


class TorsionNonzero(VerificationError):
    pass


class JacobiFailure(VerificationError):
    pass


class IrrationalSpectrum(VerificationError):
    pass


class SingularShift(VerificationError):
    pass


class PairwiseSumNotSubalgebra(VerificationError):
    pass


class DuplicateEigenvalue(VerificationError):
    pass


class SingularDenominator(VerificationError):
    pass


class NotDiagonalizable(VerificationError):
    pass


class NotACasimir(VerificationError):
    pass


def test_payload_carries_witness():
    e = NotASubalgebra('[e,f] leaves the span', pair=[0, 1])
    assert isinstance(e, VerificationError)
    assert e.payload() == {
        'error': 'NotASubalgebra',
        'message': '[e,f] leaves the span',
        'witness': {'pair': [0, 1]},
    }
    assert issubclass(MalformedInput, InputError)
