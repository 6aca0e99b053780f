"""Systems, points and word counting.

The golden-mean shift (no two adjacent 1s) is the running example: we build
it from its forbidden word, evaluate an eventually periodic point anywhere,
read itineraries, and check the word counts against the transfer matrix.
"""

from shiftembed import (Point, enumerate_periodic, enumerate_words,
                        itinerary, parse_system, product_coding,
                        serialize_system)

gm = parse_system("kind: sft\nalphabet: 2\nforbidden: [11]\n")
print("system:", serialize_system(gm).strip().replace("\n", "  "))
print("transition matrix:", gm.adjacency)

# an eventually periodic point: ...10 10 | 00100 | 001 001 ...
x = Point("10", "00100", "001", -2)
print("\nletters x_{-8..8}:", x.word(-8, 8))
print("radius-1 itinerary on [0, 4]:", itinerary(gm, x, 1, (0, 4)))
print("product coding radii (0, 1):", product_coding(gm, x, (0, 1), (0, 2)))

print("\nword counts (Fibonacci):",
      [gm.count_words(n) for n in range(1, 11)])
print("enumerated == counted:",
      all(len(enumerate_words(gm, n)) == gm.count_words(n) for n in range(1, 13)))

pts, fix = enumerate_periodic(gm, 4)
print("\nleast-period-4 points:", [p.core for p in pts], " fixed by sigma^4:", fix)
