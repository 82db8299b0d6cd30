#!/usr/bin/env python3
"""Writes fixtures/datasets/{fixture,synthetic}.json.

Expected test outputs come from the Python reference implementations below,
not from the toolkit. Re-running the script reproduces the files exactly.
"""

import json
import math
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
CORPUS = HERE / "corpus"


def snip(name):
    return (CORPUS / f"{name}.snip").read_text()


def body(sig, text):
    return f"fn {sig} {{\n{text}\n}}\n"


# ---- reference implementations -------------------------------------------

def ref_abs(x):
    return abs(x)


def ref_max(a, b):
    return max(a, b)


def ref_sum(a):
    return sum(a)


def ref_contains(a, x):
    return x in a


def ref_fact(n):
    return math.factorial(n) if n > 0 else 1


def ref_is_sorted(a):
    return all(a[i] <= a[i + 1] for i in range(len(a) - 1))


def ref_good(nums):
    n = len(nums) - 1
    return n >= 1 and sorted(nums) == list(range(1, n)) + [n, n]


def ref_sign(x):
    return (x > 0) - (x < 0)


# ---- task families ---------------------------------------------------------

ABS = "abs(x: int) -> int"
MAX = "max(a: int, b: int) -> int"
SUM = "sum(a: [int]) -> int"
CONTAINS = "contains(a: [int], x: int) -> bool"
FACT = "fact(n: int) -> int"
SORTED = "is_sorted(a: [int]) -> bool"
GOOD = "is_good(nums: [int]) -> bool"
SIGN = "sign(x: int) -> int"

TASKS = [
    {
        "name": "abs",
        "difficulty": "easy",
        "entry": ("abs", [("x", "int")], "int"),
        "ref": ref_abs,
        "tests": [[-5], [-1], [0], [1], [7], [-8], [3], [100], [-100], [2]],
        "correct": [
            snip("abs_branch"),
            snip("abs_else"),
            snip("abs_square"),
            body(ABS, "    if x * -1 > x {\n        return x * -1;\n    }\n    return x;"),
        ],
        "buggy": [
            body(ABS, "    return x;"),
            body(ABS, "    return 0 - x;"),
            snip("abs_bug"),
            body(ABS, "    if x < 0 {\n        return 1 - x;\n    }\n    return x;"),
            body(ABS, "    return x * x;"),
        ],
    },
    {
        "name": "max",
        "difficulty": "easy",
        "entry": ("max", [("a", "int"), ("b", "int")], "int"),
        "ref": ref_max,
        "tests": [[1, 2], [2, 1], [3, 3], [-1, -5], [-5, -1], [0, 0], [7, -7], [-7, 7], [100, 99], [4, 6]],
        "correct": [
            snip("max_branch"),
            snip("max_arith"),
            body(MAX, "    if b >= a {\n        return b;\n    }\n    return a;"),
            body(MAX, "    let m = a;\n    if b > m {\n        m = b;\n    }\n    return m;"),
        ],
        "buggy": [
            snip("max_bug"),
            body(MAX, "    return a;"),
            body(MAX, "    return b;"),
            body(MAX, "    return a + b;"),
            body(MAX, "    return (a + b) / 2;"),
        ],
    },
    {
        "name": "sum",
        "difficulty": "easy",
        "entry": ("sum", [("a", "[int]")], "int"),
        "ref": ref_sum,
        "tests": [[[]], [[1]], [[1, 2, 3]], [[5, -2]], [[-1, -1, -1, -1]], [[10, 20, 30, 40, 50]], [[0]], [[3, 3]],
                  [[7, 0, -7]], [[2, 4]]],
        "correct": [
            snip("sum_for"),
            snip("sum_while"),
            snip("sum_sorted"),
            body(SUM, "    let s = 0;\n    for i in 0..len(a) {\n        s = s - a[i];\n    }\n    return 0 - s;"),
        ],
        "buggy": [
            snip("sum_bug"),
            snip("sum_oob"),
            body(SUM, "    return len(a);"),
            body(SUM, "    let s = 0;\n    for i in 1..len(a) {\n        s = s + a[i];\n    }\n    return s;"),
            body(SUM, "    let s = 0;\n    for i in 0..len(a) {\n        s = s + a[i] * a[i];\n    }\n    return s;"),
        ],
    },
    {
        "name": "contains",
        "difficulty": "medium",
        "entry": ("contains", [("a", "[int]"), ("x", "int")], "bool"),
        "ref": ref_contains,
        "tests": [[[], 1], [[1], 1], [[1], 2], [[1, 2, 3], 3], [[1, 2, 3], 1], [[1, 2, 3], 4], [[5, 5], 5],
                  [[-1, 0, 1], 0], [[4, 4, 4], 3], [[9, 8, 7, 6], 6]],
        "correct": [
            snip("contains_loop"),
            snip("contains_flag"),
            body(CONTAINS, "    let s = sorted(a);\n    for i in 0..len(s) {\n        if s[i] == x {\n            return true;\n        }\n    }\n    return false;"),
            body(CONTAINS, "    let i = 0;\n    while i < len(a) && a[i] != x {\n        i = i + 1;\n    }\n    return i < len(a);"),
        ],
        "buggy": [
            snip("contains_bug"),
            body(CONTAINS, "    return len(a) > 0 && a[0] == x;"),
            body(CONTAINS, "    for i in 0..len(a) - 1 {\n        if a[i] == x {\n            return true;\n        }\n    }\n    return false;"),
            body(CONTAINS, "    return false;"),
            body(CONTAINS, "    for i in 0..len(a) {\n        if a[i] != x {\n            return true;\n        }\n    }\n    return false;"),
        ],
    },
    {
        "name": "fact",
        "difficulty": "medium",
        "entry": ("fact", [("n", "int")], "int"),
        "ref": ref_fact,
        "tests": [[0], [1], [2], [3], [4], [5], [6], [-3], [7], [10]],
        "correct": [
            snip("fact_for"),
            snip("fact_while"),
            body(FACT, "    let r = 1;\n    let i = n;\n    while i >= 2 {\n        r = r * i;\n        i = i - 1;\n    }\n    return r;"),
            body(FACT, "    let r = 1;\n    for i in 0..n {\n        r = r * (n - i);\n    }\n    return r;"),
        ],
        "buggy": [
            snip("fact_bug"),
            body(FACT, "    return n;"),
            body(FACT, "    let r = 1;\n    for i in 1..n + 1 {\n        r = r + i;\n    }\n    return r;"),
            body(FACT, "    let r = 0;\n    for i in 1..n + 1 {\n        r = r * i;\n    }\n    return r;"),
            body(FACT, "    return n * n;"),
        ],
    },
    {
        "name": "is_sorted",
        "difficulty": "medium",
        "entry": ("is_sorted", [("a", "[int]")], "bool"),
        "ref": ref_is_sorted,
        "tests": [[[]], [[1]], [[1, 2]], [[2, 1]], [[1, 1]], [[1, 2, 3]], [[1, 3, 2]], [[3, 2, 1]], [[-1, 0, 0, 4]],
                  [[0, 1, 2, 1]]],
        "correct": [
            body(SORTED, "    for i in 0..len(a) - 1 {\n        if a[i] > a[i + 1] {\n            return false;\n        }\n    }\n    return true;"),
            body(SORTED, "    return sorted(a) == a;"),
            body(SORTED, "    let i = 1;\n    while i < len(a) {\n        if a[i - 1] > a[i] {\n            return false;\n        }\n        i = i + 1;\n    }\n    return true;"),
        ],
        "buggy": [
            body(SORTED, "    for i in 0..len(a) - 1 {\n        if a[i] >= a[i + 1] {\n            return false;\n        }\n    }\n    return true;"),
            body(SORTED, "    return len(a) < 2 || a[0] <= a[1];"),
            body(SORTED, "    for i in 0..len(a) - 1 {\n        if a[i] < a[i + 1] {\n            return false;\n        }\n    }\n    return true;"),
            body(SORTED, "    return true;"),
            body(SORTED, "    for i in 0..len(a) - 2 {\n        if a[i] > a[i + 1] {\n            return false;\n        }\n    }\n    return true;"),
        ],
    },
    {
        "name": "good",
        "difficulty": "hard",
        "entry": ("is_good", [("nums", "[int]")], "bool"),
        "ref": ref_good,
        "tests": [[[2, 1, 3]], [[1, 3, 3, 2]], [[1, 1]], [[3, 4, 4, 1, 2, 1]], [[1]], [[2, 2]], [[1, 2, 2]],
                  [[2, 1, 2]], [[1, 2, 3, 3]], [[1, 2, 2, 3]], [[0, 0]], [[4, 4, 1, 2, 3]]],
        "correct": [snip("good_sorted"), snip("good_count"), snip("good_max")],
        "buggy": [
            snip("good_bug_last"),
            snip("good_bug_range"),
            snip("good_bug_len"),
            body(GOOD, "    return len(nums) > 1;"),
            body(GOOD, "    let s = sorted(nums);\n    return len(s) > 1 && s[len(s) - 1] == len(s) - 1;"),
        ],
    },
    {
        "name": "sign",
        "difficulty": "hard",
        "entry": ("sign", [("x", "int")], "int"),
        "ref": ref_sign,
        "tests": [[-5], [-1], [0], [1], [7], [-8], [3], [100], [-100], [2]],
        "correct": [
            snip("sign_branch"),
            snip("sign_div"),
            body(SIGN, "    if x == 0 {\n        return 0;\n    }\n    if x > 0 {\n        return 1;\n    }\n    return -1;"),
        ],
        "buggy": [
            snip("sign_bug"),
            body(SIGN, "    return x;"),
            body(SIGN, "    if x > 0 {\n        return 1;\n    }\n    return 0;"),
            body(SIGN, "    return x / 2;"),
            body(SIGN, "    if x > 1 {\n        return 1;\n    }\n    if x < -1 {\n        return -1;\n    }\n    return 0;"),
        ],
    },
]


def entry_json(entry):
    name, params, ret = entry
    return {"name": name, "params": [{"name": n, "type": t} for n, t in params], "return": ret}


def tests_json(task):
    return [{"input": t, "expected": task["ref"](*t)} for t in task["tests"]]


def response(rid, source, rng):
    tokens = len(source.split())
    return {"id": rid, "source": source, "logprob": round(-tokens * rng.uniform(0.05, 0.6), 6), "tokens": tokens}


# number of correct responses among five, and whether the top one is correct
MIXES = [(5, True), (4, True), (3, True), (2, False), (1, False), (0, False)]


def synthetic():
    problems = []
    for ti, task in enumerate(TASKS):
        for m in range(3):
            k, top_correct = MIXES[(ti * 3 + m) % len(MIXES)]
            rng = random.Random(1000 * ti + m)
            correct = [task["correct"][(m + j) % len(task["correct"])] for j in range(k)]
            buggy = [task["buggy"][(m + j) % len(task["buggy"])] for j in range(5 - k)]
            pid = f"{task['name']}-{m}"
            sources = (correct + buggy) if top_correct else (buggy + correct)
            responses = []
            for j, src in enumerate(sources):
                r = response(f"{pid}-r{j}", src, rng)
                is_correct = src in task["correct"]
                family = task["correct"] if is_correct else task["buggy"]
                # follow-ups: one from the same family, one correct
                r["followups"] = [
                    response(f"{pid}-r{j}-f0", family[(j + 1) % len(family)], rng),
                    response(f"{pid}-r{j}-f1", task["correct"][j % len(task["correct"])], rng),
                ]
                responses.append(r)
            problems.append({
                "id": pid,
                "difficulty": task["difficulty"],
                "entry": entry_json(task["entry"]),
                "responses": responses,
                "tests": tests_json(task),
                "top_ranked": responses[0]["id"],
            })
    return {"problems": problems}


def task(name):
    return next(t for t in TASKS if t["name"] == name)


def fixture():
    rng = random.Random(7)
    good = task("good")
    # length-1 "token counts" keep the softmax equal to the given probabilities
    probs = [0.48, 0.29, 0.23]
    good_responses = []
    for j, (src, p) in enumerate(zip(good["correct"], probs)):
        good_responses.append({
            "id": f"good-{j + 1}",
            "source": src,
            "logprob": math.log(p),
            "tokens": 1,
            "followups": [response(f"good-{j + 1}-f0", good["correct"][(j + 1) % 3], rng)],
        })
    absf, sign, sumf, fact = task("abs"), task("sign"), task("sum"), task("fact")
    double = "fn double(x: int) -> int {\n    return x + x;\n}\n"
    problems = [
        {
            "id": "2892",
            "difficulty": "easy",
            "entry": entry_json(good["entry"]),
            "responses": good_responses,
            "tests": tests_json(good),
            "top_ranked": "good-1",
        },
        {
            "id": "abs-mixed",
            "difficulty": "easy",
            "entry": entry_json(absf["entry"]),
            "responses": [
                response("a", absf["correct"][0], rng),
                response("b", absf["correct"][1], rng),
                response("c", absf["buggy"][2], rng),
                response("d", "fn abs(x: int) -> int {\n    if x < 0 {\n        return -x;\n    }\n}\n", rng),
            ],
            "tests": tests_json(absf),
            "top_ranked": "a",
        },
        {
            "id": "sign-five",
            "difficulty": "medium",
            "entry": entry_json(sign["entry"]),
            "responses": [response(f"s{j}", src, rng) for j, src in enumerate([sign["correct"][0]] + sign["buggy"][1:])],
            "tests": tests_json(sign),
            "top_ranked": "s1",
        },
        {
            "id": "double-identical",
            "difficulty": "medium",
            "entry": {"name": "double", "params": [{"name": "x", "type": "int"}], "return": "int"},
            "responses": [response(f"d{j}", double, rng) for j in range(3)],
            "tests": [{"input": [x], "expected": 2 * x} for x in [-3, 0, 1, 5, 40]],
            "top_ranked": "d0",
        },
        {
            "id": "sum-invalid-top",
            "difficulty": "hard",
            "entry": entry_json(sumf["entry"]),
            "responses": [
                response("broken", "fn sum(a: [int]) -> int {\n    let s = 0\n    return s;\n}\n", rng),
                response("ok", sumf["correct"][0], rng),
                response("ok2", sumf["correct"][1], rng),
            ],
            "tests": tests_json(sumf),
            "top_ranked": "broken",
        },
        {
            "id": "fact-mixed",
            "difficulty": "hard",
            "entry": entry_json(fact["entry"]),
            "responses": [
                response("f0", fact["correct"][0], rng),
                response("f1", fact["correct"][1], rng),
                response("f2", fact["buggy"][0], rng),
            ],
            "tests": tests_json(fact),
            "top_ranked": "f2",
        },
    ]
    return {"problems": problems}


def write(name, doc):
    path = HERE / "datasets" / name
    path.write_text(json.dumps(doc, indent=1) + "\n")
    print(f"wrote {path} ({len(doc['problems'])} problems)")


if __name__ == "__main__":
    write("fixture.json", fixture())
    write("synthetic.json", synthetic())
