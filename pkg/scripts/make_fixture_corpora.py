"""One-off generator for the shipped fixture corpora (run manually, output committed)."""

from __future__ import annotations

import csv
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from stylenlg.mr import Personality  # noqa: E402

OPENERS = {
    Personality.AGREEABLE: [
        "You want to know more about {name}?",
        "Oh right, let me tell you about {name}.",
        "Hey, {name} might suit you.",
    ],
    Personality.DISAGREEABLE: [
        "Oh God, fine, {name} then.",
        "Damn, {name} is what you get.",
        "Basically {name}, obviously.",
    ],
    Personality.CONSCIENTIOUS: [
        "Let's see, it seems {name} fits.",
        "I see that {name} could work.",
        "Let me see what {name} offers.",
    ],
    Personality.UNCONSCIENTIOUS: [
        "Mmhm... I mean, maybe {name}.",
        "Er, anyway, {name} I guess.",
        "Oh gosh, I am not sure, {name} perhaps.",
    ],
    Personality.EXTRAVERT: [
        "There you are, {name} is great, you know!",
        "{name} is the place, buddy!",
        "You know, {name} is for you, friend!",
    ],
}

CLOSERS = {
    Personality.AGREEABLE: ["okay?", "alright?", "yeah."],
    Personality.DISAGREEABLE: ["obviously.", "relatively speaking.", "end of story."],
    Personality.CONSCIENTIOUS: ["it seems.", "as far as I see.", "let's see how that sounds."],
    Personality.UNCONSCIENTIOUS: ["anyway.", "i don't know.", "or something."],
    Personality.EXTRAVERT: ["you know!", "come along, pal!", "what a find!"],
}

EATTYPES = ["restaurant", "pub", "coffee shop"]
FOODS = ["English", "Italian", "Chinese", "French", "Japanese", "Indian", "Fast food"]
PRICES = ["high", "moderate", "cheap"]
RATINGS = ["low", "average", "high"]
AREAS = ["city centre", "riverside"]

PRICE_WORDS = {"high": "expensive", "moderate": "moderately priced", "cheap": "cheap"}
RATING_WORDS = {"low": "a low rating", "average": "an average rating", "high": "a high rating"}


def restaurant_rows(rng: random.Random) -> list[tuple[str, str, str]]:
    rows = []
    for personality in Personality:
        for i in range(10):
            eattype = rng.choice(EATTYPES)
            food = rng.choice(FOODS)
            price = rng.choice(PRICES)
            rating = rng.choice(RATINGS)
            area = rng.choice(AREAS)
            ff = rng.choice(["yes", "no"])
            pairs = [("name", "nameVariable"), ("eattype", eattype), ("food", food)]
            if i % 3 != 0:
                pairs.append(("pricerange", price))
            if i % 4 == 0:
                pairs.append(("customerrating", rating))
            pairs.append(("area", area))
            pairs.append(("familyfriendly", ff))
            if i % 2 == 0:
                pairs.append(("near", "nearVariable"))
            mr = " | ".join(f"{k} = {v}" for k, v in pairs)
            opener = rng.choice(OPENERS[personality]).format(name="nameVariable")
            ff_phrase = "family friendly" if ff == "yes" else "not family friendly"
            middle_bits = [f"it is a {food} {eattype} in {area}"]
            if ("pricerange", price) in pairs:
                middle_bits.append(f"it is {PRICE_WORDS[price]}")
            if ("customerrating", rating) in pairs:
                middle_bits.append(f"it has {RATING_WORDS[rating]}")
            middle_bits.append(f"it is {ff_phrase}")
            if ("near", "nearVariable") in pairs:
                middle_bits.append("it is near nearVariable")
            connector = rng.choice([", also ", " and ", ", "])
            ref = f"{opener} Well, {connector.join(middle_bits)}, {rng.choice(CLOSERS[personality])}"
            rows.append((mr, ref, personality.value))
    return rows


VIGGO_ROWS = [
    ("give_opinion(name [SpellForce 3], rating [poor], genres [real-time strategy, role-playing], player_perspective [bird view])",
     "I think that SpellForce 3 is one of the worst games I've ever played. Trying to combine the real-time strategy and role-playing genres just doesn't work, and the bird's eye view makes it near impossible to play."),
    ("verify_attribute(name [Little Big Adventure], rating [average], has_multiplayer [no], platforms [PlayStation])",
     "I recall that you were not that fond of Little Big Adventure. Does single-player gaming on the PlayStation quickly get boring for you?"),
    ("inform(name [Assetto Corsa], player_perspective [first person], available_on_steam [yes])",
     "Assetto Corsa is a first person title available on Steam."),
    ("recommend(name [F1 2014], genres [driving/racing, simulation, sport], has_multiplayer [yes])",
     "If you're looking for a multiplayer sport racing simulation, you can't go wrong with F1 2014."),
    ("inform(name [Guitar Hero: Smash Hits], rating [poor], genres [music], player_perspective [first person])",
     "Guitar Hero: Smash Hits is a poor first person music game."),
    ("inform(name [The Witcher 3: Wild Hunt], release_year [2015], genres [adventure, role-playing], rating [excellent])",
     "The Witcher 3: Wild Hunt is an excellent adventure role-playing game from 2015."),
    ("give_opinion(name [Portal 2], rating [excellent], genres [platformer, puzzle], has_multiplayer [yes])",
     "Portal 2 is one of the best games I have played; the platformer puzzle mix works and the multiplayer is superb."),
    ("inform(name [Metro 2033], release_year [2010], genres [action, adventure, shooter], platforms [PC], available_on_steam [yes])",
     "Metro 2033 is an action adventure shooter for PC from 2010, available on Steam."),
    ("suggest(name [Stellaris], genres [strategy], player_perspective [bird view], has_linux_release [yes])",
     "Have you tried Stellaris? It is a strategy game with a bird view and it has a Linux release."),
    ("inform(name [Crysis], developer [Crytek Frankfurt], rating [good], genres [action, shooter], player_perspective [first person])",
     "Crysis, developed by Crytek Frankfurt, is a good first person action shooter."),
    ("verify_attribute(name [Age of Empires II: The Age of Kings], rating [excellent], esrb [T (for Teen)], has_multiplayer [yes])",
     "You said Age of Empires II: The Age of Kings is excellent, rated T for Teen, with multiplayer, right?"),
    ("inform(name [Never Alone], genres [platformer], player_perspective [side view], has_mac_release [no])",
     "Never Alone is a side view platformer, though it has no Mac release."),
    ("give_opinion(name [Mirror's Edge Catalyst], rating [average], player_perspective [first person], platforms [Xbox])",
     "Mirror's Edge Catalyst felt average to me; first person on Xbox just did not click."),
    ("recommend(name [Rocket League], genres [sport], has_multiplayer [yes], available_on_steam [yes])",
     "Rocket League is a great multiplayer sport pick, and it is available on Steam."),
    ("inform(name [Hellblade: Senua's Sacrifice], release_year [2017], genres [action, adventure], platforms [PlayStation])",
     "Hellblade: Senua's Sacrifice is a 2017 action adventure title on PlayStation."),
    ("suggest(name [Civilization VI], genres [strategy], player_perspective [bird view], has_multiplayer [yes])",
     "What about Civilization VI, a bird view strategy game with multiplayer?"),
]


def main() -> None:
    rng = random.Random(20240404)
    out = Path(__file__).resolve().parents[1] / "src" / "stylenlg" / "data"
    with (out / "personage_sample.csv").open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["mr", "ref", "personality"])
        for row in restaurant_rows(rng):
            writer.writerow(row)
    with (out / "viggo_sample.csv").open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["mr", "ref", "personality"])
        for mr, ref in VIGGO_ROWS:
            writer.writerow([mr, ref, ""])
    print("wrote fixture corpora to", out)


if __name__ == "__main__":
    main()
