"""Far-field expansion tables; generated by scripts/gen_farfield.py, do not edit."""

import math

import numba
import numpy as np

# d -> list of (degree, {partition: coefficient}); group value is
# r^degree * sum coefficient * prod_k u_k, u_k = sum_i (x_i^2/r^2)^k
TABLES = {
    3: [
        (-1, {(): 0.477464829275686}),
        (-3, {(): -0.17904931097838225, (2,): 0.29841551829730373}),
        (-5, {(): -0.6751651101476498, (2,): 2.3500222065912673, (2, 2): 4.308374045417323, (3,): -5.640053295819041}),
        (-7, {(): 54.631022189536864, (2,): -318.3930384245662, (2, 2): 327.0517511976614, (2, 2, 2): 198.36472167442258, (2, 3): -504.0797633138268, (3,): 244.83874218100158}),
        (-9, {(): -1832.8312340032892, (2,): 15517.407327797653, (2, 2): -46895.858089593574, (2, 2, 2): 51890.08585372529, (2, 2, 2, 2): 18962.427612564334, (2, 2, 3): -71232.77155328514, (2, 3): 9912.568520244717, (3,): -710.0123491596937, (3, 3): 24422.664532554907}),
        (-11, {(): -133886.85649623652, (2,): 1131497.2862926715, (2, 2): -1308362.764522592, (2, 2, 2): -7355047.5950283855, (2, 2, 2, 2): 11809190.410503235, (2, 2, 2, 2, 2): 3093246.004299557, (2, 2, 2, 3): -15359566.36617711, (2, 2, 3): -7941464.684141943, (2, 3): 11799109.861922467, (2, 3, 3): 12287653.092941688, (3,): -2139882.747463804, (3, 3): -5881699.198164048}),
        (-13, {(): 45303990.71316525, (2,): -525077887.16670674, (2, 2): 2073518811.2615352, (2, 2, 2): -2814919956.460184, (2, 2, 2, 2): -935298207.9877598, (2, 2, 2, 2, 2): 3765419408.3410087, (2, 2, 2, 2, 2, 2): 769122730.4440669, (2, 2, 2, 2, 3): -4746585993.59767, (2, 2, 2, 3): -6265148835.565588, (2, 2, 3): 8048907672.708279, (2, 2, 3, 3): 6213712573.43695, (2, 3): -3070309091.5524697, (2, 3, 3): -2451326949.5755053, (3,): 380260831.29776925, (3, 3): 474571946.42726016, (3, 3, 3): -962123237.1773342}),
    ],
    5: [
        (-3, {(): 0.12665147955292222}),
        (-5, {(): -0.23747152416172915, (2,): 0.5541002230440347}),
        (-7, {(): -0.9746227137470967, (2,): 4.363539256471773, (2, 2): 14.85681223036818, (3,): -16.45677662440783}),
        (-9, {(): -10.064711082635787, (2,): 98.71208895369627, (2, 2): 529.2739357068664, (2, 2, 2): 999.7396563351921, (2, 3): -2273.0922712463316, (3,): -757.6974237487772, (4,): 1432.6211793569316}),
        (-11, {(): -232.5117899170824, (2,): 3881.1100574925877, (2, 2): 24102.27612263363, (2, 2, 2): 81353.81453427626, (2, 2, 2, 2): 125748.50364841089, (2, 2, 3): -434586.828608908, (2, 3): -217743.29714980486, (2, 4): 404894.56081575283, (3,): -43481.246644465675, (3, 3): 136044.57243409293, (4,): 172308.51234715496, (5,): -251934.39339646843}),
        (-13, {(): 613916.6315443771, (2,): -9125144.053605167, (2, 2): 29439790.217346027, (2, 2, 2): -2972123.0421409407, (2, 2, 2, 2): 18249251.59197563, (2, 2, 2, 2, 2): 25435778.575482313, (2, 2, 2, 3): -118153294.02804686, (2, 2, 3): -71073054.26208183, (2, 2, 4): 130958084.51384504, (2, 3): -94724683.74305062, (2, 3, 3): 88003832.79330388, (2, 4): 135857768.80717114, (2, 5): -126754491.67759816, (3,): 21717795.693068605, (3, 3): 49009541.899031855, (3, 4): -69844311.74071737, (4,): -36278530.73921262, (5,): 29649815.211930282}),
        (-15, {(): -27268963.311457768, (2,): 645576852.1644037, (2, 2): -5921180569.257443, (2, 2, 2): 19610969634.58192, (2, 2, 2, 2): -5423354610.25242, (2, 2, 2, 2, 2): 5770742264.31255, (2, 2, 2, 2, 2, 2): 7548597204.328032, (2, 2, 2, 2, 3): -44067486382.0231, (2, 2, 2, 3): -29454631590.408516, (2, 2, 2, 4): 53960187406.55891, (2, 2, 3): -60787417747.56098, (2, 2, 3, 3): 54391868905.81138, (2, 2, 4): 83939667693.2208, (2, 2, 5): -64098162010.21542, (2, 3): 7496606474.337714, (2, 3, 3): 43801574337.90657, (2, 3, 4): -70638790786.76802, (2, 4): -9811130562.761276, (2, 5): 5710419643.636207, (3,): 36286141.507109724, (3, 3): 13613549695.2329, (3, 3, 3): -7911544568.118018, (3, 4): -40746499889.61392, (3, 5): 29774630095.06781, (4,): -676241087.826696, (4, 4): 12207164306.469128, (5,): 1056270441.4082564}),
    ],
    7: [
        (-5, {(): 0.08466027788714865}),
        (-7, {(): -0.3703887157562754, (2,): 1.1111661472688261}),
        (-9, {(): -1.4584055682903343, (2,): 7.639267262473179, (2, 2): 49.65523720607567, (3,): -47.66902771783264}),
        (-11, {(): -19.158935054861715, (2,): 229.65547207809996, (2, 2): 1793.7954440694834, (2, 2, 2): 4677.937138455712, (2, 3): -9623.184970537464, (3,): -2353.6582435679866, (4,): 5426.608066092555}),
        (-13, {(): -568.6831690978853, (2,): 11201.135305376787, (2, 2): 90342.66098642594, (2, 2, 2): 390023.008918745, (2, 2, 2, 2): 756510.1466096346, (2, 2, 3): -2420832.469150831, (2, 3): -968332.9876603324, (2, 4): 2074999.2592721407, (3,): -152293.23320149916, (3, 3): 697199.7511154393, (4,): 703695.4009705521, (5,): -1178840.1588908394}),
        (-15, {(): -24462.70595016002, (2,): 704214.1672724606, (2, 2): 6028508.755265328, (2, 2, 2): 32466893.79199682, (2, 2, 2, 2): 112436320.53985696, (2, 2, 2, 2, 2): 187028220.99556693, (2, 2, 2, 3): -816123146.1624739, (2, 2, 3): -411238915.6969974, (2, 2, 4): 846210635.42192, (2, 3): -96288611.4604743, (2, 3, 3): 568653547.0035301, (2, 4): 431859220.83601433, (2, 5): -762562227.7825117, (3,): -12496081.58990581, (3, 3): 129998703.59339961, (3, 4): -420187350.00260854, (4,): 88168297.33025749, (5,): -300473726.0710011, (6,): 415943033.3359155}),
        (-17, {(): -1409164.3835397167, (2,): 55675576.66559245, (2, 2): 500608059.8196225, (2, 2, 2): 3068712486.8957386, (2, 2, 2, 2): 14117442704.125607, (2, 2, 2, 2, 2): 43367168743.347084, (2, 2, 2, 2, 2, 2): 65596252092.92436, (2, 2, 2, 2, 3): -363302319283.88873, (2, 2, 2, 3): -209845663957.0261, (2, 2, 2, 4): 420813497240.0256, (2, 2, 3): -59052104017.38916, (2, 2, 3, 3): 424180005217.9458, (2, 2, 4): 257734604283.63126, (2, 2, 5): -471311116908.8287, (2, 3): -10759730338.706842, (2, 3, 3): 157919828782.4387, (2, 3, 4): -519404088021.9744, (2, 4): 75924790279.3776, (2, 5): -278245339735.1996, (2, 6): 420674385340.1115, (3,): -1252729435.7466002, (3, 3): 20194145681.7712, (3, 3, 3): -58173257858.461136, (3, 4): -133938219374.58148, (3, 5): 205663032832.94342, (4,): 12182012643.48419, (4, 4): 84318845458.11273, (5,): -63892274848.15127, (6,): 179397715788.6137, (7,): -216525773666.7288}),
    ],
}


@numba.njit(cache=True)
def farfield_d3(c):
    r2 = 0.0
    for i in range(3):
        r2 += float(c[i]) * float(c[i])
    inv = 1.0 / r2
    u1 = 0.0
    u2 = 0.0
    u3 = 0.0
    for i in range(3):
        y = float(c[i]) * float(c[i]) * inv
        p = y
        u1 += p
        p *= y
        u2 += p
        p *= y
        u3 += p
    g0 = 0.477464829275686
    g1 = -0.17904931097838225 + 0.29841551829730373 * u2
    g2 = -0.6751651101476498 + 2.3500222065912673 * u2 + 4.308374045417323 * u2 * u2 + -5.640053295819041 * u3
    g3 = 54.631022189536864 + -318.3930384245662 * u2 + 327.0517511976614 * u2 * u2 + 198.36472167442258 * u2 * u2 * u2 + -504.0797633138268 * u2 * u3 + 244.83874218100158 * u3
    g4 = -1832.8312340032892 + 15517.407327797653 * u2 + -46895.858089593574 * u2 * u2 + 51890.08585372529 * u2 * u2 * u2 + 18962.427612564334 * u2 * u2 * u2 * u2 + -71232.77155328514 * u2 * u2 * u3 + 9912.568520244717 * u2 * u3 + -710.0123491596937 * u3 + 24422.664532554907 * u3 * u3
    g5 = -133886.85649623652 + 1131497.2862926715 * u2 + -1308362.764522592 * u2 * u2 + -7355047.5950283855 * u2 * u2 * u2 + 11809190.410503235 * u2 * u2 * u2 * u2 + 3093246.004299557 * u2 * u2 * u2 * u2 * u2 + -15359566.36617711 * u2 * u2 * u2 * u3 + -7941464.684141943 * u2 * u2 * u3 + 11799109.861922467 * u2 * u3 + 12287653.092941688 * u2 * u3 * u3 + -2139882.747463804 * u3 + -5881699.198164048 * u3 * u3
    g6 = 45303990.71316525 + -525077887.16670674 * u2 + 2073518811.2615352 * u2 * u2 + -2814919956.460184 * u2 * u2 * u2 + -935298207.9877598 * u2 * u2 * u2 * u2 + 3765419408.3410087 * u2 * u2 * u2 * u2 * u2 + 769122730.4440669 * u2 * u2 * u2 * u2 * u2 * u2 + -4746585993.59767 * u2 * u2 * u2 * u2 * u3 + -6265148835.565588 * u2 * u2 * u2 * u3 + 8048907672.708279 * u2 * u2 * u3 + 6213712573.43695 * u2 * u2 * u3 * u3 + -3070309091.5524697 * u2 * u3 + -2451326949.5755053 * u2 * u3 * u3 + 380260831.29776925 * u3 + 474571946.42726016 * u3 * u3 + -962123237.1773342 * u3 * u3 * u3
    tot = ((((((g6) * inv + g5) * inv + g4) * inv + g3) * inv + g2) * inv + g1) * inv + g0
    return tot * inv ** 0 / math.sqrt(r2)


@numba.njit(cache=True)
def farfield_d5(c):
    r2 = 0.0
    for i in range(5):
        r2 += float(c[i]) * float(c[i])
    inv = 1.0 / r2
    u1 = 0.0
    u2 = 0.0
    u3 = 0.0
    u4 = 0.0
    u5 = 0.0
    for i in range(5):
        y = float(c[i]) * float(c[i]) * inv
        p = y
        u1 += p
        p *= y
        u2 += p
        p *= y
        u3 += p
        p *= y
        u4 += p
        p *= y
        u5 += p
    g0 = 0.12665147955292222
    g1 = -0.23747152416172915 + 0.5541002230440347 * u2
    g2 = -0.9746227137470967 + 4.363539256471773 * u2 + 14.85681223036818 * u2 * u2 + -16.45677662440783 * u3
    g3 = -10.064711082635787 + 98.71208895369627 * u2 + 529.2739357068664 * u2 * u2 + 999.7396563351921 * u2 * u2 * u2 + -2273.0922712463316 * u2 * u3 + -757.6974237487772 * u3 + 1432.6211793569316 * u4
    g4 = -232.5117899170824 + 3881.1100574925877 * u2 + 24102.27612263363 * u2 * u2 + 81353.81453427626 * u2 * u2 * u2 + 125748.50364841089 * u2 * u2 * u2 * u2 + -434586.828608908 * u2 * u2 * u3 + -217743.29714980486 * u2 * u3 + 404894.56081575283 * u2 * u4 + -43481.246644465675 * u3 + 136044.57243409293 * u3 * u3 + 172308.51234715496 * u4 + -251934.39339646843 * u5
    g5 = 613916.6315443771 + -9125144.053605167 * u2 + 29439790.217346027 * u2 * u2 + -2972123.0421409407 * u2 * u2 * u2 + 18249251.59197563 * u2 * u2 * u2 * u2 + 25435778.575482313 * u2 * u2 * u2 * u2 * u2 + -118153294.02804686 * u2 * u2 * u2 * u3 + -71073054.26208183 * u2 * u2 * u3 + 130958084.51384504 * u2 * u2 * u4 + -94724683.74305062 * u2 * u3 + 88003832.79330388 * u2 * u3 * u3 + 135857768.80717114 * u2 * u4 + -126754491.67759816 * u2 * u5 + 21717795.693068605 * u3 + 49009541.899031855 * u3 * u3 + -69844311.74071737 * u3 * u4 + -36278530.73921262 * u4 + 29649815.211930282 * u5
    g6 = -27268963.311457768 + 645576852.1644037 * u2 + -5921180569.257443 * u2 * u2 + 19610969634.58192 * u2 * u2 * u2 + -5423354610.25242 * u2 * u2 * u2 * u2 + 5770742264.31255 * u2 * u2 * u2 * u2 * u2 + 7548597204.328032 * u2 * u2 * u2 * u2 * u2 * u2 + -44067486382.0231 * u2 * u2 * u2 * u2 * u3 + -29454631590.408516 * u2 * u2 * u2 * u3 + 53960187406.55891 * u2 * u2 * u2 * u4 + -60787417747.56098 * u2 * u2 * u3 + 54391868905.81138 * u2 * u2 * u3 * u3 + 83939667693.2208 * u2 * u2 * u4 + -64098162010.21542 * u2 * u2 * u5 + 7496606474.337714 * u2 * u3 + 43801574337.90657 * u2 * u3 * u3 + -70638790786.76802 * u2 * u3 * u4 + -9811130562.761276 * u2 * u4 + 5710419643.636207 * u2 * u5 + 36286141.507109724 * u3 + 13613549695.2329 * u3 * u3 + -7911544568.118018 * u3 * u3 * u3 + -40746499889.61392 * u3 * u4 + 29774630095.06781 * u3 * u5 + -676241087.826696 * u4 + 12207164306.469128 * u4 * u4 + 1056270441.4082564 * u5
    tot = ((((((g6) * inv + g5) * inv + g4) * inv + g3) * inv + g2) * inv + g1) * inv + g0
    return tot * inv ** 1 / math.sqrt(r2)


@numba.njit(cache=True)
def farfield_d7(c):
    r2 = 0.0
    for i in range(7):
        r2 += float(c[i]) * float(c[i])
    inv = 1.0 / r2
    u1 = 0.0
    u2 = 0.0
    u3 = 0.0
    u4 = 0.0
    u5 = 0.0
    u6 = 0.0
    u7 = 0.0
    for i in range(7):
        y = float(c[i]) * float(c[i]) * inv
        p = y
        u1 += p
        p *= y
        u2 += p
        p *= y
        u3 += p
        p *= y
        u4 += p
        p *= y
        u5 += p
        p *= y
        u6 += p
        p *= y
        u7 += p
    g0 = 0.08466027788714865
    g1 = -0.3703887157562754 + 1.1111661472688261 * u2
    g2 = -1.4584055682903343 + 7.639267262473179 * u2 + 49.65523720607567 * u2 * u2 + -47.66902771783264 * u3
    g3 = -19.158935054861715 + 229.65547207809996 * u2 + 1793.7954440694834 * u2 * u2 + 4677.937138455712 * u2 * u2 * u2 + -9623.184970537464 * u2 * u3 + -2353.6582435679866 * u3 + 5426.608066092555 * u4
    g4 = -568.6831690978853 + 11201.135305376787 * u2 + 90342.66098642594 * u2 * u2 + 390023.008918745 * u2 * u2 * u2 + 756510.1466096346 * u2 * u2 * u2 * u2 + -2420832.469150831 * u2 * u2 * u3 + -968332.9876603324 * u2 * u3 + 2074999.2592721407 * u2 * u4 + -152293.23320149916 * u3 + 697199.7511154393 * u3 * u3 + 703695.4009705521 * u4 + -1178840.1588908394 * u5
    g5 = -24462.70595016002 + 704214.1672724606 * u2 + 6028508.755265328 * u2 * u2 + 32466893.79199682 * u2 * u2 * u2 + 112436320.53985696 * u2 * u2 * u2 * u2 + 187028220.99556693 * u2 * u2 * u2 * u2 * u2 + -816123146.1624739 * u2 * u2 * u2 * u3 + -411238915.6969974 * u2 * u2 * u3 + 846210635.42192 * u2 * u2 * u4 + -96288611.4604743 * u2 * u3 + 568653547.0035301 * u2 * u3 * u3 + 431859220.83601433 * u2 * u4 + -762562227.7825117 * u2 * u5 + -12496081.58990581 * u3 + 129998703.59339961 * u3 * u3 + -420187350.00260854 * u3 * u4 + 88168297.33025749 * u4 + -300473726.0710011 * u5 + 415943033.3359155 * u6
    g6 = -1409164.3835397167 + 55675576.66559245 * u2 + 500608059.8196225 * u2 * u2 + 3068712486.8957386 * u2 * u2 * u2 + 14117442704.125607 * u2 * u2 * u2 * u2 + 43367168743.347084 * u2 * u2 * u2 * u2 * u2 + 65596252092.92436 * u2 * u2 * u2 * u2 * u2 * u2 + -363302319283.88873 * u2 * u2 * u2 * u2 * u3 + -209845663957.0261 * u2 * u2 * u2 * u3 + 420813497240.0256 * u2 * u2 * u2 * u4 + -59052104017.38916 * u2 * u2 * u3 + 424180005217.9458 * u2 * u2 * u3 * u3 + 257734604283.63126 * u2 * u2 * u4 + -471311116908.8287 * u2 * u2 * u5 + -10759730338.706842 * u2 * u3 + 157919828782.4387 * u2 * u3 * u3 + -519404088021.9744 * u2 * u3 * u4 + 75924790279.3776 * u2 * u4 + -278245339735.1996 * u2 * u5 + 420674385340.1115 * u2 * u6 + -1252729435.7466002 * u3 + 20194145681.7712 * u3 * u3 + -58173257858.461136 * u3 * u3 * u3 + -133938219374.58148 * u3 * u4 + 205663032832.94342 * u3 * u5 + 12182012643.48419 * u4 + 84318845458.11273 * u4 * u4 + -63892274848.15127 * u5 + 179397715788.6137 * u6 + -216525773666.7288 * u7
    tot = ((((((g6) * inv + g5) * inv + g4) * inv + g3) * inv + g2) * inv + g1) * inv + g0
    return tot * inv ** 2 / math.sqrt(r2)


@numba.njit(cache=True)
def farfield(c):
    d = c.shape[0]
    if d == 3:
        return farfield_d3(c)
    if d == 5:
        return farfield_d5(c)
    if d == 7:
        return farfield_d7(c)
    return np.nan
