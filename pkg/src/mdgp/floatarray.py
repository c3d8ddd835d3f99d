
import numpy as np
import numpy.typing as npt

# Plain assignments: typing.TypeAlias needs Python 3.10.
FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]
