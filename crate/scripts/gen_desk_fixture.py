#!/usr/bin/env python3
"""Generate fixtures/desk/dump.jsonl: 200 synthetic anxiety-forum posts with
threaded comments, in the JSON-lines shape of a Reddit dump.

Deterministic (fixed seed). Re-run after editing the phrase banks:

    python3 scripts/gen_desk_fixture.py
"""

import json
import random
from pathlib import Path

SEED = 7
N_POSTS = 200
OUT = Path(__file__).resolve().parent.parent / "fixtures" / "desk" / "dump.jsonl"

THEMES = {
    "exams": {
        "titles": [
            "Exam tomorrow and I can't stop shaking",
            "Finals week is destroying me",
            "Panic before every exam",
            "Failed my exam because of anxiety",
            "How do you study when anxiety hits?",
        ],
        "bodies": [
            "I have an exam tomorrow and my heart keeps racing. I studied for weeks but I feel like I forgot everything.",
            "Every time I sit down to study my chest gets tight. The exam is in two days and I can't focus at all.",
            "My grades matter so much to my parents and I'm terrified of failing this exam again.",
            "I blanked during the exam today even though I knew the material. Does anyone else freeze like this?",
            "I keep rereading my notes but nothing sticks. The exam stress is making me feel sick.",
        ],
    },
    "sleep": {
        "titles": [
            "Can't sleep, mind won't stop",
            "Insomnia every night this week",
            "Waking up at 3am with panic",
            "Sleep is the only thing I want",
            "Anxiety keeps me awake",
        ],
        "bodies": [
            "I lie in bed for hours and my thoughts just race. I haven't had a proper night of sleep in weeks.",
            "I wake up at 3am with my heart pounding and can't fall asleep again. I'm exhausted all day.",
            "Before my exam I could not sleep at all and I think the lack of sleep made everything worse.",
            "My sleep schedule is wrecked. I dread going to bed because that's when the worrying starts.",
            "I'm so tired but when I try to sleep my body feels wired and restless.",
        ],
    },
    "panic": {
        "titles": [
            "First panic attack, thought I was dying",
            "Panic attacks at work",
            "Is this a panic attack or something else?",
            "Panic attack on the bus",
            "Scared of the next panic attack",
        ],
        "bodies": [
            "My chest hurt, my hands went numb and I couldn't breathe. The doctor said it was a panic attack.",
            "I had a panic attack in a meeting and had to leave. Now I'm scared it will happen again.",
            "My heart was racing and I felt dizzy for no reason. Is this what a panic attack feels like?",
            "I get panic attacks on public transport and I'm starting to avoid going out.",
            "The fear of having another panic attack is almost worse than the attacks themselves.",
        ],
    },
    "social": {
        "titles": [
            "Social anxiety is ruining my friendships",
            "Can't talk to people at parties",
            "Scared to speak in class",
            "Overthinking every conversation",
            "Phone calls terrify me",
        ],
        "bodies": [
            "I replay every conversation for days and worry that everyone secretly hates me.",
            "At parties I freeze and end up hiding in the bathroom. I feel so alone.",
            "I have to give a presentation in class and I'm dreading it. My voice shakes when I talk.",
            "I cancel plans with friends because the anxiety before meeting them is too much.",
            "Making a simple phone call takes me hours of preparation and I still feel sick.",
        ],
    },
}

SUPPORTIVE = [
    "I'm so sorry you're going through this. You are not alone, I've felt exactly the same way.",
    "Sending you a big hug. It's completely understandable to feel this way and I'm proud of you for sharing.",
    "That sounds really hard. Please be gentle with yourself, you're doing the best you can.",
    "I hear you. It gets better, I promise. Hang in there.",
]

ADVICE = {
    "exams": [
        "Try breaking your study into 25 minute blocks with short breaks. It helped me focus before my exam.",
        "I would recommend talking to your university counseling service, they often help with exam stress.",
        "Make sure you get enough sleep before the exam. Studying all night usually makes it worse.",
    ],
    "sleep": [
        "Try to keep a regular bedtime and avoid screens for an hour before sleep. Drink some chamomile tea.",
        "Adding ambient music helps too. Some people recommend a white noise app to fall asleep.",
        "You could try progressive muscle relaxation in bed: tense and release each muscle group slowly.",
    ],
    "panic": [
        "Try the 4-7-8 breathing technique when you feel a panic attack coming: breathe in for 4, hold for 7, out for 8.",
        "I would suggest seeing a therapist about CBT. It taught me how to ride out panic attacks.",
        "Grounding helps me: name five things you can see and four things you can touch.",
    ],
    "social": [
        "Start small, for example say hi to one classmate. Exposure in small steps really works.",
        "Practice your presentation in front of a mirror or a friend first, it helps a lot.",
        "Consider joining a club around a hobby, it's easier to talk when there's a shared activity.",
    ],
}

ASKS = [
    "Any advice would help.",
    "How do I get through this?",
    "What should I do?",
    "Does anyone have tips that actually work?",
    "Has anyone tried medication for this?",
]

REPLIES = [
    "Thank you, this means a lot.",
    "Thanks, I'll try that tonight.",
    "Same here, you're not alone.",
]


def main() -> None:
    rng = random.Random(SEED)
    themes = list(THEMES)
    lines = []
    t0 = 1_577_836_800  # 2020-01-01
    comment_no = 0
    for i in range(N_POSTS):
        theme = themes[i % len(themes)]
        bank = THEMES[theme]
        # Some posts mix two themes so topics are not perfectly separable.
        body = rng.choice(bank["bodies"])
        if rng.random() < 0.25:
            other = THEMES[rng.choice(themes)]
            body += " " + rng.choice(other["bodies"])
        if rng.random() < 0.4:
            body += " " + rng.choice(ASKS)
        pid = f"p{i:03d}"
        created = t0 + i * 3600
        lines.append({"id": pid, "title": rng.choice(bank["titles"]), "selftext": body, "created_utc": created})
        n_comments = rng.randint(2, 6)
        top_ids = []
        for j in range(n_comments):
            cid = f"c{comment_no:04d}"
            comment_no += 1
            r = rng.random()
            if r < 0.35:
                text = rng.choice(SUPPORTIVE)
            elif r < 0.75:
                text = rng.choice(ADVICE[theme])
            else:
                text = rng.choice(SUPPORTIVE) + " " + rng.choice(ADVICE[theme])
            if top_ids and rng.random() < 0.3:
                parent = "t1_" + rng.choice(top_ids)
                text = rng.choice(REPLIES)
            else:
                parent = "t3_" + pid
                top_ids.append(cid)
            if rng.random() < 0.04:
                text = rng.choice(["[deleted]", "[removed]"])
            lines.append({"id": cid, "parent_id": parent, "body": text, "created_utc": created + 60 * (j + 1)})
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with OUT.open("w") as f:
        for rec in lines:
            f.write(json.dumps(rec) + "\n")
    print(f"wrote {len(lines)} records to {OUT}")


if __name__ == "__main__":
    main()
