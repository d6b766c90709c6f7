// Generated by scripts/welch_oracle.py; do not edit.

/// `(a, b, t, df, p)` with two-sided p.
pub const WELCH_CASES: &[(&[f64], &[f64], f64, f64, f64)] = &[
    (
        &[0.5, 0.6, 0.7],
        &[0.8, 0.9, 1.0],
        -3.674234614174768507,
        4.0,
        0.021311641128756700375,
    ),
    (
        &[0.98, 0.99, 0.97, 1.0],
        &[0.95, 0.96, 0.99, 0.97, 0.94],
        2.13857125943941559,
        6.8690005324408610329,
        0.070525411185172001362,
    ),
    (
        &[
            0.6985, 0.709, 0.6933, 0.6713, 0.6376, 0.6592, 0.6484, 0.74, 0.6967, 0.6883, 0.7225, 0.7224, 0.7371,
            0.7042, 0.7218, 0.6677, 0.7219, 0.6633, 0.6803, 0.6497, 0.614, 0.7583, 0.7816, 0.6997, 0.7654, 0.7262,
            0.7018, 0.7356, 0.7073, 0.7311, 0.728, 0.7377, 0.7783, 0.7304, 0.7094, 0.6956, 0.742, 0.6195, 0.6662,
            0.6991,
        ],
        &[
            0.622, 0.5613, 0.5819, 0.7575, 0.8008, 0.7449, 0.8165, 0.9369, 0.7676, 0.517, 0.675, 0.8372, 0.6845,
            0.7553, 0.6973, 0.707, 0.716, 0.6962, 0.7201, 0.8549, 0.6431, 0.7762, 0.7617,
        ],
        -0.89300344650714111285,
        26.295878481772877187,
        0.3799553546465559651,
    ),
    (
        &[
            0.8617, 0.9741, 0.9078, 0.9073, 0.9078, 0.8907, 0.8935, 1.0, 1.0, 0.9343, 1.0, 0.9446, 0.9877, 0.9818, 1.0,
            1.0, 0.9535, 0.9907, 1.0, 1.0, 1.0, 0.7835, 0.9004, 1.0, 0.9923, 0.9726, 0.8323, 0.9028, 0.844, 0.8539,
            1.0, 1.0, 1.0, 1.0, 0.9683, 0.9995, 1.0,
        ],
        &[1.0, 0.9218, 1.0, 0.9025, 1.0, 1.0, 0.7957, 1.0, 1.0, 1.0, 0.8811],
        -0.15863109947847247832,
        14.7410619108159619,
        0.87611232012065832092,
    ),
    (
        &[
            0.9562, 1.0, 0.8442, 0.9729, 0.8508, 0.9497, 0.9822, 0.8815, 0.9481, 1.0, 0.9131, 0.968, 0.8084, 0.9148,
            0.9481, 1.0, 0.8968, 0.9789, 0.9867, 0.9622, 0.8921,
        ],
        &[
            0.9934, 1.0, 1.0, 1.0, 1.0, 0.9863, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.9876, 1.0, 1.0, 1.0, 0.993, 1.0,
            1.0, 1.0,
        ],
        -5.0953663932567116791,
        20.230945470682632336,
        0.000053388321095274103387,
    ),
    (
        &[
            0.5889, 0.61, 0.5874, 0.5727, 0.6034, 0.6063, 0.5846, 0.6151, 0.6174, 0.5767, 0.5898, 0.5725,
        ],
        &[0.602, 0.5876, 0.6267, 0.6182, 0.6262, 0.6199, 0.612, 0.6252],
        -3.1108519219691695113,
        16.766632063919311987,
        0.0064365813509569512663,
    ),
    (
        &[
            0.6234, 0.6279, 0.665, 0.6456, 0.7964, 0.6637, 0.655, 0.7936, 0.7184, 0.795, 0.7899, 0.8195, 0.7159,
            0.6883, 0.6476, 0.6599, 0.5936, 0.8255,
        ],
        &[
            0.7587, 0.8837, 0.8126, 0.8537, 0.8117, 0.8045, 0.8426, 0.7801, 0.7204, 0.9088, 0.8433, 0.8688, 0.8752,
            0.7316, 0.8266, 0.753, 0.7716, 0.7709, 0.8146, 0.8543,
        ],
        -4.9890932844526806399,
        29.795983270103611507,
        0.000024435921655846205285,
    ),
    (
        &[
            0.7959, 0.6244, 0.7368, 0.6916, 0.7365, 0.6254, 0.6682, 0.8107, 0.6858, 0.7198, 0.6533, 0.6866, 0.6592,
            0.615, 0.7169, 0.8116, 0.8486, 0.6144, 0.7631, 0.9503, 0.4767, 0.6445, 0.7675, 0.6898, 0.5379, 0.7888,
            0.796, 0.8258, 0.6219, 0.8009, 0.8331, 0.8895, 0.6491, 0.8795, 0.6969,
        ],
        &[
            0.8215, 0.8385, 0.8347, 0.8324, 0.854, 0.8317, 0.8359, 0.8257, 0.847, 0.8355, 0.8423, 0.8279, 0.8252,
            0.8498, 0.8186, 0.8409, 0.8376, 0.8404, 0.8402, 0.8272, 0.8282, 0.8308, 0.8328, 0.8388, 0.8628, 0.8223,
            0.8245, 0.8576, 0.8184, 0.8304, 0.8349, 0.8566, 0.829, 0.8369, 0.8119, 0.8336,
        ],
        -6.3851754589192248143,
        34.825972262123192986,
        2.4614813613793521341e-7,
    ),
    (
        &[
            0.9295, 0.8849, 0.9021, 0.8588, 0.8632, 0.9313, 0.8955, 0.9261, 0.9001, 0.9019, 0.8584, 0.916, 0.9467,
            0.9099, 0.9012, 0.8771, 0.9224, 0.9042, 0.8724, 0.9131, 0.902, 0.901, 0.9035, 0.8987, 0.8995, 0.8642,
            0.9139, 0.9009, 0.937, 0.9137, 0.9009, 0.9061, 0.9335, 0.8833, 0.8858, 0.9249, 0.8712,
        ],
        &[
            0.9305, 0.9706, 0.8943, 0.9465, 0.9268, 0.9093, 0.9269, 0.9589, 0.9501, 0.9155, 0.8708, 0.9003, 0.8899,
            0.9168, 0.8864, 0.9009,
        ],
        -2.1314401944361588333,
        23.660433557279040796,
        0.04364742203657009371,
    ),
    (
        &[
            0.6883, 0.6776, 0.6837, 0.677, 0.7533, 0.8269, 0.5727, 0.5991, 0.7149, 0.597, 0.7305, 0.6252, 0.6474,
            0.6455, 0.5369, 0.6103, 0.6701, 0.6291, 0.6727, 0.7922, 0.6647,
        ],
        &[
            0.5883, 0.5858, 0.5819, 0.6024, 0.5999, 0.5916, 0.6035, 0.6033, 0.6038, 0.5982, 0.6005, 0.5964, 0.5905,
            0.5799, 0.6086, 0.5988, 0.5992, 0.5964, 0.5805, 0.5975,
        ],
        4.6671720980598192817,
        20.597799602089220393,
        0.00013819749734835626039,
    ),
    (
        &[
            0.823, 0.8365, 0.8299, 0.9, 0.8573, 0.8881, 0.9127, 0.862, 0.8669, 0.8272, 0.8711, 0.8531, 0.8549, 0.8585,
            0.876, 0.8533, 0.8387, 0.8867, 0.8251, 0.8589, 0.8495, 0.9169, 0.8268, 0.7756, 0.8688, 0.8479, 0.8153,
            0.8026, 0.8056, 0.8559, 0.9035, 0.9231, 0.8633, 0.8668, 0.8255, 0.8522, 0.8637, 0.8398,
        ],
        &[0.7528, 0.827, 0.7641, 0.8016, 0.8628, 0.7784, 0.7699, 0.8304, 0.7746],
        4.4048805564672802501,
        11.070104302886815206,
        0.0010387812353639840997,
    ),
    (
        &[
            0.8868, 0.8046, 0.762, 0.8904, 0.8169, 0.6102, 0.8399, 0.7623, 0.7102, 0.7067, 0.6369, 0.5531, 0.7176,
            0.7186, 0.7771, 0.7137, 0.6927,
        ],
        &[
            0.7205, 0.7122, 0.7429, 0.7486, 0.7127, 0.7493, 0.7263, 0.7146, 0.721, 0.7187, 0.7214, 0.7416, 0.7394,
            0.7299, 0.7413, 0.7187, 0.7291, 0.7259, 0.7195, 0.7355, 0.7087, 0.7251, 0.7185, 0.7239, 0.7295, 0.7285,
            0.726, 0.727, 0.7152, 0.7378, 0.7175, 0.7239, 0.7177, 0.7558, 0.7274,
        ],
        0.6250318226188716945,
        16.242152127506418248,
        0.54063267410545499753,
    ),
    (
        &[0.6543, 0.8202, 0.6527, 0.6745, 0.6902],
        &[
            0.7352, 0.7379, 0.7435, 0.7311, 0.7349, 0.7298, 0.7281, 0.7341, 0.7206, 0.723, 0.7411, 0.73, 0.7324,
            0.7332, 0.7213, 0.729, 0.7316, 0.7303, 0.7395, 0.7336, 0.7331, 0.7245, 0.7321, 0.7277, 0.7398, 0.7379,
            0.7272, 0.7278,
        ],
        -1.0693331547572313148,
        4.0098437598820409742,
        0.34501894131775604518,
    ),
    (
        &[
            0.6282, 0.6808, 0.7155, 0.723, 0.7055, 0.7337, 0.71, 0.6834, 0.7285, 0.6835, 0.6439, 0.7037, 0.7084,
            0.6925, 0.692, 0.6973, 0.6869, 0.701, 0.7116, 0.7227, 0.7134, 0.7477, 0.7347, 0.7098, 0.7002, 0.7044,
            0.7047, 0.6699, 0.7218, 0.7226, 0.6845, 0.6832, 0.6918, 0.7372, 0.6745, 0.6852, 0.6718,
        ],
        &[
            0.7664, 0.6489, 0.5623, 0.7211, 0.6529, 0.6694, 0.5857, 0.5843, 0.7749, 0.7849, 0.6753, 0.7557, 0.5562,
            0.7785, 0.8299, 0.7904, 0.8179, 0.7547, 0.734, 0.7954, 0.6643,
        ],
        -0.48543145958667286464,
        21.891403430278991703,
        0.63219316950272950763,
    ),
    (
        &[
            0.6945, 0.6692, 0.7113, 0.6842, 0.6834, 0.6417, 0.6613, 0.6375, 0.6324, 0.7274, 0.6697, 0.6486, 0.6594,
            0.6662, 0.6608, 0.6425, 0.7118, 0.6771, 0.6733, 0.6922, 0.6479, 0.6616, 0.7402,
        ],
        &[0.7377, 0.6023, 0.6706],
        0.0875162996112632646,
        2.095358142765261266,
        0.93791144230811072017,
    ),
    (
        &[
            0.8002, 0.9499, 0.8358, 0.9012, 0.887, 0.8416, 0.9658, 1.0, 0.9247, 0.8398, 0.8889, 0.7967,
        ],
        &[
            0.8101, 0.847, 0.9679, 0.9567, 0.8102, 1.0, 0.8604, 0.9694, 0.9237, 0.8213, 0.8404, 0.8818, 0.8826, 0.9334,
            0.9987, 0.9277, 0.9572, 0.8885, 0.8877, 0.9479, 0.9375, 0.8616, 0.8486, 0.9406, 0.8645, 0.9401, 0.9203,
            0.95, 0.8557, 1.0, 0.9415, 0.8661, 0.8986,
        ],
        -1.0014767430653694568,
        17.040766786452909655,
        0.33060604578749466703,
    ),
    (
        &[
            0.898, 1.0, 0.8775, 0.749, 0.9784, 0.9013, 0.9917, 0.9481, 0.8744, 0.9322, 0.9006, 0.9153, 0.949, 1.0,
            0.8899, 0.9099, 1.0, 1.0, 0.9692, 0.9583, 0.9468, 0.9114, 1.0, 0.8298, 0.9636, 1.0, 0.9794, 1.0, 0.8753,
            0.8448, 0.9105,
        ],
        &[
            1.0, 1.0, 1.0, 0.9898, 0.9948, 1.0, 1.0, 0.9966, 1.0, 1.0, 1.0, 0.9996, 1.0, 1.0,
        ],
        -6.0265466001239218437,
        30.318491973003953,
        1.2417444113924911485e-6,
    ),
    (
        &[
            0.9574, 0.9701, 0.9555, 0.9599, 0.9576, 0.9725, 0.9614, 0.9669, 0.9615, 0.9539, 0.9538, 0.968, 0.9511,
            0.9549, 0.9701, 0.9631, 0.977, 0.9474, 0.9626, 0.9674, 0.9621, 0.963, 0.9693, 0.9669, 0.9623, 0.9786,
            0.9574, 0.9679, 0.9608, 0.9668, 0.9581, 0.9577, 0.9534, 0.9536, 0.9576, 0.9494, 0.9704, 0.9533, 0.9783,
            0.96,
        ],
        &[
            0.8961, 0.935, 0.8937, 0.861, 0.9736, 0.8718, 0.8999, 0.9236, 0.9185, 0.9954, 1.0, 0.8748, 1.0, 0.8934,
            0.8562, 0.8957,
        ],
        3.5485439960766665604,
        15.300861697249293587,
        0.0028401579721253069998,
    ),
    (
        &[0.8166, 0.7964],
        &[0.8531, 0.8699, 0.8991, 0.7365, 0.7456],
        -0.41066484294855547885,
        4.6100230952338386386,
        0.69970191759671662504,
    ),
    (
        &[
            0.6658, 0.7802, 0.85, 0.8411, 0.8115, 0.7641, 0.8332, 0.8587, 0.7969, 0.7758, 0.8331, 0.9061, 0.9056,
            0.8552, 0.8554, 0.7524, 0.8952, 0.8313, 0.8597, 0.842, 0.799, 0.8149, 0.8836, 0.9458,
        ],
        &[
            0.7723, 0.8744, 0.7962, 0.8544, 0.7862, 0.9296, 0.8058, 0.799, 0.7478, 0.7732, 0.8244, 0.8747, 0.7984,
            0.7048, 0.863, 0.8528, 0.816, 0.8783, 0.7606, 0.8541, 0.7916,
        ],
        0.86398305445470969251,
        42.968729875991366318,
        0.39239470188984604004,
    ),
];
