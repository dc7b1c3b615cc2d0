from autodiff.tape import (
    ADValue,
    Tape,
    as_ad,
    as_matrix,
    emit,
    backward,
    constant,
    elementwise,
    matmul,
    reduce_sum,
    stable_sigmoid,
    transpose,
)
from autodiff.gradcheck import check_gradients, numeric_gradient
