//! CIE 1931 2-degree colour matching functions and the relative spectral
//! power of Standard Illuminant D65, 380-780 nm at 5 nm steps.

/// `(wavelength nm, x-bar, y-bar, z-bar, D65 relative power)`.
pub const CIE_5NM: [(f64, f64, f64, f64, f64); 81] = [
    (380.0, 0.001368, 3.9e-05, 0.006450001, 49.9755),
    (385.0, 0.002236, 6.4e-05, 0.01054999, 52.3118),
    (390.0, 0.004243, 0.00012, 0.02005001, 54.6482),
    (395.0, 0.00765, 0.000217, 0.03621, 68.7015),
    (400.0, 0.01431, 0.000396, 0.06785001, 82.7549),
    (405.0, 0.02319, 0.00064, 0.1102, 87.1204),
    (410.0, 0.04351, 0.00121, 0.2074, 91.486),
    (415.0, 0.07763, 0.00218, 0.3713, 92.4589),
    (420.0, 0.13438, 0.004, 0.6456, 93.4318),
    (425.0, 0.21477, 0.0073, 1.0390501, 90.057),
    (430.0, 0.2839, 0.0116, 1.3856, 86.6823),
    (435.0, 0.3285, 0.01684, 1.62296, 95.7736),
    (440.0, 0.34828, 0.023, 1.74706, 104.865),
    (445.0, 0.34806, 0.0298, 1.7826, 110.936),
    (450.0, 0.3362, 0.038, 1.77211, 117.008),
    (455.0, 0.3187, 0.048, 1.7441, 117.41),
    (460.0, 0.2908, 0.06, 1.6692, 117.812),
    (465.0, 0.2511, 0.0739, 1.5281, 116.336),
    (470.0, 0.19536, 0.09098, 1.28764, 114.861),
    (475.0, 0.1421, 0.1126, 1.0419, 115.392),
    (480.0, 0.09564, 0.13902, 0.8129501, 115.923),
    (485.0, 0.05795001, 0.1693, 0.6162, 112.367),
    (490.0, 0.03201, 0.20802, 0.46518, 108.811),
    (495.0, 0.0147, 0.2586, 0.3533, 109.082),
    (500.0, 0.0049, 0.323, 0.272, 109.354),
    (505.0, 0.0024, 0.4073, 0.2123, 108.578),
    (510.0, 0.0093, 0.503, 0.1582, 107.802),
    (515.0, 0.0291, 0.6082, 0.1117, 106.296),
    (520.0, 0.06327, 0.71, 0.07824999, 104.79),
    (525.0, 0.1096, 0.7932, 0.05725001, 106.239),
    (530.0, 0.1655, 0.862, 0.04216, 107.689),
    (535.0, 0.2257499, 0.9148501, 0.02984, 106.047),
    (540.0, 0.2904, 0.954, 0.0203, 104.405),
    (545.0, 0.3597, 0.9803, 0.0134, 104.225),
    (550.0, 0.4334499, 0.9949501, 0.008749999, 104.046),
    (555.0, 0.5120501, 1.0, 0.005749999, 102.023),
    (560.0, 0.5945, 0.995, 0.0039, 100.0),
    (565.0, 0.6784, 0.9786, 0.002749999, 98.1671),
    (570.0, 0.7621, 0.952, 0.0021, 96.3342),
    (575.0, 0.8425, 0.9154, 0.0018, 96.0611),
    (580.0, 0.9163, 0.87, 0.001650001, 95.788),
    (585.0, 0.9786, 0.8163, 0.0014, 92.2368),
    (590.0, 1.0263, 0.757, 0.0011, 88.6856),
    (595.0, 1.0567, 0.6949, 0.001, 89.3459),
    (600.0, 1.0622, 0.631, 0.0008, 90.0062),
    (605.0, 1.0456, 0.5668, 0.0006, 89.8026),
    (610.0, 1.0026, 0.503, 0.00034, 89.5991),
    (615.0, 0.9384, 0.4412, 0.00024, 88.6489),
    (620.0, 0.8544499, 0.381, 0.00019, 87.6987),
    (625.0, 0.7514, 0.321, 0.0001, 85.4936),
    (630.0, 0.6424, 0.265, 4.999999e-05, 83.2886),
    (635.0, 0.5419, 0.217, 3e-05, 83.4939),
    (640.0, 0.4479, 0.175, 2e-05, 83.6992),
    (645.0, 0.3608, 0.1382, 1e-05, 81.863),
    (650.0, 0.2835, 0.107, 0.0, 80.0268),
    (655.0, 0.2187, 0.0816, 0.0, 80.1207),
    (660.0, 0.1649, 0.061, 0.0, 80.2146),
    (665.0, 0.1212, 0.04458, 0.0, 81.2462),
    (670.0, 0.0874, 0.032, 0.0, 82.2778),
    (675.0, 0.0636, 0.0232, 0.0, 80.281),
    (680.0, 0.04677, 0.017, 0.0, 78.2842),
    (685.0, 0.0329, 0.01192, 0.0, 74.0027),
    (690.0, 0.0227, 0.00821, 0.0, 69.7213),
    (695.0, 0.01584, 0.005723, 0.0, 70.6652),
    (700.0, 0.01135916, 0.004102, 0.0, 71.6091),
    (705.0, 0.008110916, 0.002929, 0.0, 72.979),
    (710.0, 0.005790346, 0.002091, 0.0, 74.349),
    (715.0, 0.004109457, 0.001484, 0.0, 67.9765),
    (720.0, 0.002899327, 0.001047, 0.0, 61.604),
    (725.0, 0.00204919, 0.00074, 0.0, 65.7448),
    (730.0, 0.001439971, 0.00052, 0.0, 69.8856),
    (735.0, 0.0009999493, 0.0003611, 0.0, 72.4863),
    (740.0, 0.0006900786, 0.0002492, 0.0, 75.087),
    (745.0, 0.0004760213, 0.0001719, 0.0, 69.3398),
    (750.0, 0.0003323011, 0.00012, 0.0, 63.5927),
    (755.0, 0.0002348261, 8.48e-05, 0.0, 55.0054),
    (760.0, 0.0001661505, 6e-05, 0.0, 46.4182),
    (765.0, 0.000117413, 4.24e-05, 0.0, 56.6118),
    (770.0, 8.307527e-05, 3e-05, 0.0, 66.8054),
    (775.0, 5.870652e-05, 2.12e-05, 0.0, 65.0941),
    (780.0, 4.150994e-05, 1.499e-05, 0.0, 63.3828),
];
