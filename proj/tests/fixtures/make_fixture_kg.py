#!/usr/bin/env python3
"""Writes the deterministic ~1K-entity fixture graph used by the pipeline tests.

Usage: make_fixture_kg.py OUT_DIR
"""
import json
import random
import sys
from pathlib import Path

SYLLABLES = [
    "ka", "lo", "ver", "min", "tas", "ro", "bel", "dan", "mar", "el", "fen", "gor", "hal", "is", "jor",
    "kel", "lum", "nor", "os", "pra", "quin", "ral", "sen", "tor", "ul", "val", "wen", "yor", "zan", "bri",
    "cal", "dur", "esk", "fal", "gan", "hel", "ith", "kor", "lan", "mev", "nal", "ost", "pel", "rin", "sul",
]

RELATIONS = {
    "P19": ("place of birth", "most specific known birth location of a person"),
    "P27": ("country of citizenship", "the object is a country that recognizes the subject as its citizen"),
    "P69": ("educated at", "educational institution attended by subject"),
    "P108": ("employer", "person or organization for which the subject works"),
    "P166": ("award received", "award or recognition received by a person or organization"),
    "P569": ("date of birth", "date on which the subject was born"),
    "P26": ("spouse", "the subject has the object as their spouse"),
    "P463": ("member of", "organization that the subject belongs to"),
    "P131": ("located in", "the item is located on the territory of the following administrative entity"),
    "P17": ("country", "sovereign state that this item is in"),
    "P190": ("twinned with", "twin towns, sister cities and similar partnerships"),
    "P112": ("founded by", "founder or co-founder of this organization or place"),
    "P571": ("inception", "time when an entity begins to exist"),
    "P159": ("headquarters location", "city where an organization's headquarters is located"),
    "P1027": ("conferred by", "person or organization who grants an award"),
    "P2789": ("connects with", "item with which the item is physically connected"),
    "P585": ("point in time", "time and date something took place"),
    "P361": ("part of", "object of which the subject is a part"),
}

RESERVED = {"first", "link", "the", "following", "next", "trying", "dead", "end", "no", "route", "from", "here",
            "in", "of", "and", "back", "going", "links"}


class Names:
    def __init__(self, rng):
        self.rng = rng
        self.used = set()

    def word(self, syllables=None):
        while True:
            n = syllables or self.rng.choice([2, 2, 3])
            w = "".join(self.rng.choice(SYLLABLES) for _ in range(n)).capitalize()
            if w.lower() not in self.used and w.lower() not in RESERVED and len(w) > 3:
                self.used.add(w.lower())
                return w


def main(out_dir):
    rng = random.Random(20250117)
    names = Names(rng)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entities = []
    facts = []
    next_id = [10001]

    def entity(label, types, aliases=(), flags=(), qid=None):
        if qid is None:
            qid = "Q%d" % next_id[0]
            next_id[0] += 1
        entities.append({"id": qid, "label": label, "aliases": list(aliases), "instance_of": list(types),
                         "flags": list(flags)})
        return qid

    def fact(s, p, obj, qualifiers=()):
        rec = {"subject": s, "property": p, "property_label": RELATIONS[p][0], "qualifiers": list(qualifiers)}
        if isinstance(obj, dict):
            rec["object"] = {"literal": obj}
        else:
            rec["object"] = {"entity": obj}
        facts.append(rec)

    def ts(y, m=0, d=0):
        return {"kind": "timestamp", "value": "+%04d-%02d-%02dT00:00:00Z" % (y, m, d)}

    types = {}
    for key, label in [("human", "human"), ("city", "city"), ("country", "country"), ("region", "region"),
                       ("university", "university"), ("award", "award"), ("organization", "organization"),
                       ("company", "company"), ("river", "river"), ("institute", "research institute"),
                       ("class", "class")]:
        types[key] = entity(label, [], qid="Q%d" % (9000 + len(types)))
    for t in list(types.values()):
        if t != types["class"]:
            entities[[e["id"] for e in entities].index(t)]["instance_of"] = [types["class"]]

    # filtered material: time terms, bookkeeping, digits, unlabeled
    day = entity("day", [], qid="Q573")
    year_class = entity("year", [], qid="Q577")
    category = entity("Wikimedia category", [], qid="Q4167836")
    filtered = [
        entity("Midsummer", [day]),
        entity("2019", [year_class]),
        entity("Category Festivals", [category]),
        entity("Template Cities", [], flags=["wikimedia-internal"]),
        entity("", [types["city"]]),
        entity("Route 66 Memorial", [types["organization"]]),
    ]

    countries, regions, institutes = [], [], []
    for _ in range(30):
        c = names.word()
        cid = entity(c, [types["country"]])
        countries.append(cid)
        for prefix in ("Upper", "Lower", "Greater"):
            rid = entity("%s %s" % (prefix, c), [types["region"]])
            regions.append((rid, cid))
            fact(rid, "P131", cid)
            fact(rid, "P17", cid)
        # three-level chain: country -> region -> institute
        rid = regions[-3][0]
        iid = entity("Upper %s Institute" % c, [types["institute"]])
        institutes.append(iid)
        fact(iid, "P131", rid)

    cities = []
    for _ in range(120):
        rid, cid = rng.choice(regions)
        city = entity(names.word(), [types["city"]])
        cities.append(city)
        fact(city, "P131", rid)
        fact(city, "P17", cid)
    for city in cities:
        for other in rng.sample(cities, 2):
            if other != city:
                fact(city, "P190", other)

    universities = []
    for i in range(80):
        if i < 40:
            city = cities[i]
            label = "University of %s" % next(e["label"] for e in entities if e["id"] == city)
        else:
            city = rng.choice(cities)
            label = "%s University" % names.word()
        uid = entity(label, [types["university"]])
        universities.append(uid)
        fact(uid, "P131", city)
        fact(uid, "P571", ts(rng.randint(1600, 1950)))

    orgs = [entity("%s %s" % (names.word(), rng.choice(["Society", "League", "Council", "Guild"])),
                   [types["organization"]]) for _ in range(60)]
    companies = [entity("%s %s" % (names.word(), rng.choice(["Works", "Holdings", "Industries"])),
                        [types["company"]]) for _ in range(40)]
    for o in orgs + companies:
        fact(o, "P159", rng.choice(cities))
        fact(o, "P571", ts(rng.randint(1800, 1990), rng.randint(1, 12), rng.randint(1, 28)))
    awards = [entity("%s %s" % (names.word(), rng.choice(["Prize", "Medal", "Award"])), [types["award"]])
              for _ in range(40)]
    for a in awards:
        fact(a, "P1027", rng.choice(orgs))
    rivers = [entity("%s River" % names.word(), [types["river"]]) for _ in range(30)]
    for r in rivers:
        for rid, _ in rng.sample(regions, 3):
            fact(r, "P2789", rid)
    for i in institutes:
        fact(i, "P361", rng.choice(universities))

    humans = []
    special_dates = [(1935, 1, 15), (1970, 1, 20), (1936, 2, 29)]
    for i in range(440):
        first, last = names.word(), names.word()
        hid = entity("%s %s" % (first, last), [types["human"]], aliases=["%s. %s" % (first[0], last)])
        humans.append(hid)
        y, m, d = special_dates[i] if i < len(special_dates) else (rng.randint(1890, 1990), rng.randint(1, 12),
                                                                  rng.randint(1, 28))
        fact(hid, "P569", ts(y, m, d))
        city = rng.choice(cities)
        fact(hid, "P19", city)
        fact(hid, "P27", next(f["object"]["entity"] for f in facts if f["subject"] == city and f["property"] == "P17"))
        fact(hid, "P69", rng.choice(universities))
        fact(hid, "P108", rng.choice(companies + orgs + universities))
        for a in rng.sample(awards, rng.choice([1, 1, 2])):
            fact(hid, "P166", a, [{"property": "P585", "property_label": RELATIONS["P585"][0],
                                   "value": ts(y + rng.randint(25, 60))}])
        fact(hid, "P463", rng.choice(orgs))
    for a, b in zip(humans[0::2], humans[1::2]):
        if rng.random() < 0.5:
            fact(a, "P26", b)
            fact(b, "P26", a)
    for o in orgs + companies + universities[40:]:
        fact(o, "P112", rng.choice(humans))
    # enough degree for the institutes to survive a k=5 core
    for i in institutes:
        for h in rng.sample(humans, 4):
            fact(h, "P108", i)

    # facts touching filtered entities
    fact(humans[0], "P166", filtered[0])
    fact(cities[0], "P361", filtered[2])
    fact(filtered[1], "P17", countries[0])

    with open(out / "entities.jsonl", "w") as f:
        for e in entities:
            f.write(json.dumps(e, ensure_ascii=False) + "\n")
    with open(out / "facts.jsonl", "w") as f:
        for r in facts:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")
    with open(out / "relations.json", "w") as f:
        json.dump({p: d for p, (_, d) in sorted(RELATIONS.items())}, f, indent=2)
        f.write("\n")
    seeds = [humans[0], humans[1], cities[0], universities[0], countries[0]]
    config = {
        "seed": 7,
        "in_flight": 2,
        "kg": {"entities": "entities.jsonl", "facts": "facts.jsonl", "relations": "relations.json"},
        "sampler": {"seeds": seeds, "iterations": 11, "uniformity": 0.6, "k": 5, "per_node_cap": 32},
        "qa": {"per_motif": 12},
        "nav": {"per_bucket": 10},
    }
    with open(out / "config.json", "w") as f:
        json.dump(config, f, indent=2)
        f.write("\n")
    print("%d entities, %d facts" % (len(entities), len(facts)))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "kg1k")
