"""Regenerate the bundled mini noun lexicon (WNDB-format index.noun/data.noun).

The shipped database is intentionally small: common scene/object vocabulary
plus the synonym groups the matching logic relies on. Point the toolkit at a
full WordNet 3.x dictionary directory instead for broad coverage.

Usage: python scripts/build_mini_lexicon.py [--out src/editverify/data/wordnet_mini]
"""

from __future__ import annotations

import argparse
from collections import defaultdict
from pathlib import Path

# (lemmas..., gloss) — lemmas in one entry share a synset.
SYNSETS = [
    (("sofa", "couch", "lounge"), "an upholstered seat for more than one person"),
    (("pig", "hog", "squealer"), "domestic swine"),
    (("carpet", "rug"), "floor covering of thick woven fabric"),
    (("floor", "flooring"), "the inside lower horizontal surface of a room"),
    (("wood",), "the hard fibrous substance of trees"),
    (("vase",), "an open container used for holding flowers"),
    (("squirrel",), "a bushy-tailed arboreal rodent"),
    (("tree",), "a tall perennial woody plant"),
    (("flowerbed",), "a bed in which flowers are growing"),
    (("door",), "a swinging barrier closing an entrance"),
    (("wall",), "an upright structure dividing or enclosing an area"),
    (("box",), "a rigid rectangular container"),
    (("text",), "the words of something written"),
    (("image", "picture", "icon"), "a visual representation"),
    (("plant", "flora"), "a living organism lacking the power of locomotion"),
    (("cactus",), "a spiny succulent plant of arid regions"),
    (("umbrella",), "a collapsible canopy carried for protection from rain or sun"),
    (("bench",), "a long seat for several people"),
    (("table",), "a piece of furniture with a flat top and legs"),
    (("car", "auto", "automobile"), "a motor vehicle with four wheels"),
    (("truck", "lorry"), "an automotive vehicle for hauling loads"),
    (("sign",), "a board displaying information or directions"),
    (("lollipop",), "hard candy on a stick"),
    (("coat",), "an outer garment with sleeves"),
    (("bird",), "a warm-blooded egg-laying vertebrate with feathers"),
    (("dog",), "a domesticated carnivorous mammal"),
    (("cat",), "a small domesticated feline"),
    (("man",), "an adult male person"),
    (("woman",), "an adult female person"),
    (("child", "kid"), "a young human being"),
    (("boy",), "a male child"),
    (("girl",), "a female child"),
    (("person", "individual"), "a human being"),
    (("face",), "the front of the human head"),
    (("hand",), "the end part of the arm"),
    (("head",), "the upper part of the body"),
    (("hair",), "a covering of filaments growing from the skin"),
    (("eye",), "the organ of sight"),
    (("shadow",), "a dark area cast by a body blocking light"),
    (("line",), "a mark that is long relative to its width"),
    (("star",), "a figure with five or more points"),
    (("hole",), "an opening through something"),
    (("cutout",), "a shape cut out of a surface"),
    (("teardrop",), "a drop shape like a falling tear"),
    (("fridge", "refrigerator", "icebox"), "an appliance for keeping food cold"),
    (("bottom",), "the lowest part of anything"),
    (("window",), "an opening in a wall fitted with glass"),
    (("curtain", "drape"), "hanging cloth used to block light or views"),
    (("color", "colour"), "visual appearance determined by reflected light"),
    (("resolution",), "the fineness of image detail"),
    (("edge",), "the boundary of a surface"),
    (("shape", "form"), "the spatial arrangement of something"),
    (("grass",), "ground-covering green herbage"),
    (("sky",), "the apparent dome over the earth"),
    (("field",), "an open expanse of land"),
    (("road", "route"), "an open way for travel or transportation"),
    (("street",), "a thoroughfare in a town or city"),
    (("house",), "a dwelling for people"),
    (("building", "edifice"), "a structure with a roof and walls"),
    (("roof",), "the protective covering on top of a building"),
    (("hat",), "headwear with a shaped crown and brim"),
    (("cap",), "tight-fitting brimless headwear"),
    (("chair",), "a seat for one person with a back"),
    (("seat",), "furniture designed for sitting on"),
    (("bed",), "furniture for sleeping on"),
    (("lamp",), "an artificial source of light"),
    (("light",), "a source of illumination"),
    (("flower", "blossom", "bloom"), "the reproductive part of a plant"),
    (("bush", "shrub"), "a low woody perennial plant"),
    (("rock", "stone"), "a lump of hard consolidated mineral matter"),
    (("pillow",), "a cushion to support the head"),
    (("cushion",), "a soft pad for sitting or leaning on"),
    (("bottle",), "a narrow-necked vessel for liquids"),
    (("cup",), "a small open drinking container"),
    (("glass",), "a container made of glass for drinking"),
    (("plate",), "a flat dish for serving food"),
    (("dish",), "a vessel from which food is served"),
    (("cake",), "a baked sweet food"),
    (("pineapple",), "a large tropical fruit with spiny skin"),
    (("fruit",), "the sweet edible part of a plant"),
    (("apple",), "a round fruit with crisp flesh"),
    (("banana",), "an elongated yellow fruit"),
    (("pizza",), "a baked dish of dough with toppings"),
    (("helicopter", "chopper"), "an aircraft with horizontal rotors"),
    (("airplane", "aeroplane", "plane"), "a fixed-wing powered aircraft"),
    (("boat",), "a small vessel for travel on water"),
    (("ship",), "a large seagoing vessel"),
    (("bicycle", "bike"), "a two-wheeled pedal vehicle"),
    (("motorcycle",), "a two-wheeled motor vehicle"),
    (("bus",), "a large passenger road vehicle"),
    (("train",), "connected rail cars pulled by a locomotive"),
    (("clock",), "an instrument that shows the time"),
    (("mirror",), "a reflecting surface"),
    (("towel",), "absorbent cloth for drying"),
    (("sink",), "a basin with a water supply and drain"),
    (("toilet",), "a plumbing fixture for defecation and urination"),
    (("oven",), "an enclosed kitchen compartment for baking"),
    (("stove",), "an appliance for cooking"),
    (("pan",), "a shallow cooking vessel"),
    (("pot",), "a deep round cooking vessel"),
    (("jar",), "a wide-mouthed cylindrical container"),
    (("book",), "a written work of bound pages"),
    (("telephone", "phone"), "a device for voice communication at a distance"),
    (("computer",), "a machine for performing computations"),
    (("laptop",), "a portable personal computer"),
    (("keyboard",), "a device with keys for typing"),
    (("mouse",), "a small rodent"),
    (("screen", "monitor"), "a display surface for images"),
    (("television", "tv"), "an electronic device that receives and displays broadcasts"),
    (("ball",), "a round object used in games"),
    (("kite",), "a light frame covered with fabric flown in the wind"),
    (("knife",), "a cutting tool with a sharp blade"),
    (("fork",), "an eating utensil with prongs"),
    (("spoon",), "an eating utensil with a shallow bowl"),
    (("bowl",), "a round deep dish"),
    (("sandwich",), "food between slices of bread"),
    (("orange",), "a round citrus fruit"),
    (("carrot",), "an orange root vegetable"),
    (("horse",), "a large hoofed domesticated mammal"),
    (("sheep",), "a woolly ruminant mammal"),
    (("cow",), "a domesticated bovine animal"),
    (("elephant",), "a very large mammal with a trunk"),
    (("bear",), "a large heavy omnivorous mammal"),
    (("zebra",), "an African equine with black and white stripes"),
    (("giraffe",), "a tall African ruminant with a very long neck"),
    (("backpack", "knapsack", "rucksack"), "a bag carried on the back"),
    (("handbag", "purse"), "a bag carried by hand"),
    (("bag",), "a flexible container"),
    (("tie", "necktie"), "neckwear knotted under a collar"),
    (("suitcase",), "a case for carrying clothes when traveling"),
    (("water",), "a clear colorless liquid"),
    (("snow",), "frozen precipitation of ice crystals"),
    (("beach",), "a shore of sand or pebbles"),
    (("mountain",), "a large natural elevation of land"),
    (("river",), "a large natural stream of water"),
    (("lake",), "a large inland body of water"),
    (("fence",), "a barrier enclosing an area"),
    (("pole",), "a long slender rounded rod"),
    (("basket",), "a woven container"),
    (("candle",), "a stick of wax with a wick"),
    (("blanket",), "a large covering of soft fabric"),
    (("ceiling",), "the overhead interior surface of a room"),
    (("desk",), "a table used for writing or working"),
    (("paper",), "material made of cellulose pulp in thin sheets"),
    (("leaf",), "the flat green organ of a plant"),
    (("branch",), "a woody limb of a tree"),
    (("trunk",), "the main stem of a tree"),
    (("food",), "a substance eaten for nourishment"),
    (("meat",), "the flesh of animals used as food"),
    (("bread",), "a baked food made of flour"),
    (("cheese",), "a food made from pressed milk curds"),
    (("egg",), "an oval reproductive body laid by birds"),
    (("background",), "the part of a scene behind the main subject"),
    (("frame",), "a rigid border enclosing something"),
    (("border",), "the outer edge of an area"),
    (("pattern",), "a repeated decorative design"),
    (("material", "stuff"), "the substance something is made of"),
    (("surface",), "the outer boundary of an object"),
    (("metal",), "a hard shiny elemental substance"),
    (("plastic",), "a synthetic moldable material"),
    (("fabric", "cloth", "textile"), "material made by weaving fibers"),
    (("leather",), "material made from tanned animal hide"),
    (("brick",), "a rectangular block of fired clay"),
    (("tile",), "a thin flat slab for covering surfaces"),
    (("sand",), "loose granular rock particles"),
    (("dirt", "soil"), "the loose surface material of the ground"),
    (("ground",), "the solid surface of the earth"),
    (("park",), "public land kept for recreation"),
    (("garden",), "a plot where plants are cultivated"),
    (("yard",), "the grounds around a building"),
    (("kitchen",), "a room where food is prepared"),
    (("bathroom",), "a room with a bath or shower"),
    (("bedroom",), "a room for sleeping"),
    (("room",), "an enclosed area within a building"),
    (("counter",), "a flat work surface in a kitchen or shop"),
    (("shelf",), "a flat horizontal board for holding objects"),
    (("cabinet",), "a piece of furniture with shelves or drawers"),
    (("drawer",), "a sliding storage compartment"),
    (("microwave",), "an oven that heats food with electromagnetic waves"),
    (("toaster",), "an appliance for browning bread"),
    (("painting",), "a picture made with paint"),
    (("poster",), "a large printed sheet for display"),
    (("photograph", "photo"), "an image recorded by a camera"),
    (("stop",), "the act or place of stopping"),
    (("thing",), "a separate and self-contained entity"),
    (("side",), "a surface or line bounding something"),
    (("object",), "a tangible and visible entity"),
    (("area",), "a part of a surface or region"),
    (("corner",), "the place where two edges meet"),
    (("middle", "center"), "an area equidistant from the edges"),
    (("top",), "the highest part of something"),
    (("front",), "the side that faces forward"),
    (("back", "rear"), "the side opposite the front"),
]


def build(out_dir: Path) -> None:
    lemma_index: dict[str, list[str]] = defaultdict(list)
    data_lines: list[str] = []
    for i, (lemmas, gloss) in enumerate(SYNSETS):
        offset = f"{1740 + i * 100:08d}"
        words = " ".join(f"{lemma} {j:x}" for j, lemma in enumerate(lemmas))
        data_lines.append(f"{offset} 03 n {len(lemmas):02x} {words} 000 | {gloss}  ")
        for lemma in lemmas:
            lemma_index[lemma].append(offset)

    index_lines = []
    for lemma in sorted(lemma_index):
        offsets = lemma_index[lemma]
        n = len(offsets)
        index_lines.append(f"{lemma} n {n} 0 {n} 0 {' '.join(offsets)}  ")

    out_dir.mkdir(parents=True, exist_ok=True)
    header = "  1 Mini noun database in WNDB file format (index.noun / data.noun).\n"
    (out_dir / "index.noun").write_text(header + "\n".join(index_lines) + "\n")
    (out_dir / "data.noun").write_text(header + "\n".join(data_lines) + "\n")
    (out_dir / "VERSION").write_text("mini-nouns-1\n")
    print(f"wrote {len(index_lines)} lemmas, {len(data_lines)} synsets to {out_dir}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument(
        "--out",
        type=Path,
        default=Path(__file__).resolve().parent.parent / "src/editverify/data/wordnet_mini",
    )
    args = ap.parse_args()
    build(args.out)
